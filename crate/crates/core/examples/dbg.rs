use padic_williamson::padic::*;
use padic_williamson::symplin::*;
use padic_williamson::classify::*;
use padic_williamson::ext::*;
fn main() {
    let p = Prime::new(3).unwrap();
    let s = |n: i64| PadicScalar::from_i64(p, n);
    let r = s(7).sqrt().unwrap().unwrap();
    let sv = s(13).sqrt().unwrap().unwrap();
    let nf = NormalForm::Dim4Case3{ c: s(-1), t1: s(1), t2: s(1), a: s(3), b: s(0), r: r.clone(), s: sv.clone() };
    let m = normal_form_matrix(p, &nf).unwrap();
    let EigenTower::QuarticEigen{tower, gamma_class, lambda_sq_orig, r: rr, s: ss, ..} = eigen_structure(&m).unwrap() else { panic!() };
    println!("row class {:04b} (nbits {}), rr ord {:?} prec {}, ss ord {:?} prec {}", gamma_class.bits, gamma_class.nbits, rr.ord(), rr.precision(), ss.ord(), ss.precision());
    // paper config
    let ext = tower.base().clone();
    let cls = match ext_square_class(&lambda_sq_orig) { Ok(c) => c, Err(e) => { println!("cls err {e}"); return } };
    println!("cls orig {:04b}", cls.bits);
    let rep = class_representative_ext(&ext, cls);
    let t2 = TowerExt::new(rep).unwrap();
    let ratio = lambda_sq_orig.div(t2.gamma_sq()).unwrap();
    let w = match sqrt_ext(&ratio) { Ok(Some(w)) => w, Ok(None) => { println!("no sqrt"); return }, Err(e) => { println!("sqrt err {e}"); return } };
    println!("w: a ord {:?} prec {} b ord {:?} prec {}", w.a.ord(), w.a.precision(), w.b.ord(), w.b.precision());
    let lam = t2.elem(ext.zero(), w.clone());
    let a_tow = mat_to_tower(&omega0_inv(p,4).unwrap().mul(&m), &t2);
    let u = match eigenvector(&a_tow, &lam) { Ok(u) => u, Err(e) => { println!("eigvec err {e}"); return } };
    for (i,z) in u.iter().enumerate() {
        println!("u[{i}]: xa({:?},{}) xb({:?},{}) ya({:?},{}) yb({:?},{})",
          z.x.a.ord(), z.x.a.precision(), z.x.b.ord(), z.x.b.precision(),
          z.y.a.ord(), z.y.a.precision(), z.y.b.ord(), z.y.b.precision());
    }
    let uhat: Vec<TowerElem> = u.iter().map(|z| z.hat_conj()).collect();
    let om = mat_to_tower(&omega0(p,4).unwrap(), &t2);
    let pr = sym_pairing(&om, &u, &uhat);
    println!("pairing x zero={} y: a({:?},{}) b({:?},{})", pr.x.a.is_zero_to_precision() && pr.x.b.is_zero_to_precision(),
      pr.y.a.ord(), pr.y.a.precision(), pr.y.b.ord(), pr.y.b.precision());
    let one = PadicScalar::one(p);
    for (aa, bb) in [(one.clone(), s(0)), (s(3), s(0))] {
        let val = ext.elem(bb.clone(), one.clone()).mul(&ext.alpha()).scale(&aa).div(&pr.y);
        match val {
            Ok(v) => match ext_square_class(&v) {
                Ok(c2) => println!("(a,b)=({aa},{bb}): class {:04b} member {:?}", c2.bits, dsq_ext_member(&ext, cls, c2)),
                Err(e) => println!("(a,b)=({aa},{bb}): class err {e}  v = a({:?},{}) b({:?},{})", v.a.ord(), v.a.precision(), v.b.ord(), v.b.precision()),
            },
            Err(e) => println!("(a,b)=({aa},{bb}): div err {e}"),
        }
    }
}
