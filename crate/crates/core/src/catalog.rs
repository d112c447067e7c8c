//! Named small groups and the transitive catalog used by the property checks.

use crate::error::{Error, Result};
use crate::group::PermGroup;
use crate::perm::Permutation;
use crate::products;

fn cyc(n: usize, cycles: &[Vec<usize>]) -> Permutation {
    Permutation::from_cycles(n, cycles).expect("valid catalog cycle")
}

/// `S(n)` generated by `(0 1)` and `(0 .. n-1)`.
pub fn symmetric(n: usize) -> PermGroup {
    PermGroup::symmetric(n)
}

/// `A(n)` generated by `(0 1 2)` and an even long cycle.
pub fn alternating(n: usize) -> PermGroup {
    let mut gens = Vec::new();
    if n >= 3 {
        gens.push(cyc(n, &[vec![0, 1, 2]]));
        if n >= 4 {
            let long: Vec<usize> = if n % 2 == 1 { (0..n).collect() } else { (1..n).collect() };
            gens.push(cyc(n, &[long]));
        }
    }
    PermGroup::with_degree(n, gens).unwrap()
}

pub fn cyclic(n: usize) -> PermGroup {
    let gens = if n >= 2 { vec![cyc(n, &[(0..n).collect()])] } else { vec![] };
    PermGroup::with_degree(n, gens).unwrap()
}

/// Dihedral group of order `2n` on the vertices of an `n`-gon.
pub fn dihedral(n: usize) -> PermGroup {
    assert!(n >= 3, "dihedral groups need at least 3 points");
    let rot = cyc(n, &[(0..n).collect()]);
    let refl = Permutation::from_images((0..n).map(|i| (n - i) % n).collect()).unwrap();
    PermGroup::from_generators(vec![rot, refl]).unwrap()
}

pub fn klein_four() -> PermGroup {
    PermGroup::from_generators(vec![
        cyc(4, &[vec![0, 1], vec![2, 3]]),
        cyc(4, &[vec![0, 2], vec![1, 3]]),
    ])
    .unwrap()
}

/// The Frobenius group `x -> ax + b` over GF(5).
pub fn frobenius20() -> PermGroup {
    let shift = cyc(5, &[vec![0, 1, 2, 3, 4]]);
    let scale = Permutation::from_images((0..5).map(|x| (2 * x) % 5).collect()).unwrap();
    PermGroup::from_generators(vec![shift, scale]).unwrap()
}

/// Looks up an atom such as `S(3)`, `D(8)` or `V4` by family and argument.
pub fn atom(family: &str, arg: Option<usize>) -> Result<PermGroup> {
    let need = |a: Option<usize>| a.ok_or_else(|| Error::invalid(format!("{family} needs an argument")));
    match family {
        "S" => {
            let n = need(arg)?;
            nonzero(n)?;
            Ok(symmetric(n))
        }
        "A" => {
            let n = need(arg)?;
            nonzero(n)?;
            Ok(alternating(n))
        }
        "C" => {
            let n = need(arg)?;
            nonzero(n)?;
            Ok(cyclic(n))
        }
        "D" => {
            let n = need(arg)?;
            if n < 6 || n % 2 != 0 {
                return Err(Error::invalid(format!("D({n}) needs an even order of at least 6")));
            }
            Ok(dihedral(n / 2))
        }
        "V4" if arg.is_none() => Ok(klein_four()),
        "F20" if arg.is_none() => Ok(frobenius20()),
        _ => Err(Error::invalid(format!("unknown atom {family}"))),
    }
}

fn nonzero(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("degree must be positive"));
    }
    Ok(())
}

/// Every transitive group of degree 2 to 5 up to permutation isomorphism.
pub fn transitive_up_to_5() -> Vec<(String, PermGroup)> {
    let mut out: Vec<(String, PermGroup)> = vec![
        ("S(2)".into(), symmetric(2)),
        ("C(3)".into(), cyclic(3)),
        ("S(3)".into(), symmetric(3)),
        ("C(4)".into(), cyclic(4)),
        ("V4".into(), klein_four()),
        ("D(8)".into(), dihedral(4)),
        ("A(4)".into(), alternating(4)),
        ("S(4)".into(), symmetric(4)),
        ("C(5)".into(), cyclic(5)),
        ("D(10)".into(), dihedral(5)),
        ("F20".into(), frobenius20()),
        ("A(5)".into(), alternating(5)),
        ("S(5)".into(), symmetric(5)),
    ];
    out.shrink_to_fit();
    out
}

/// Transitive groups of degree at most 3, used as top groups.
pub fn transitive_up_to_3() -> Vec<(String, PermGroup)> {
    transitive_up_to_5().into_iter().filter(|(_, g)| g.degree() <= 3).collect()
}

/// A catalog of transitive groups of degree at most `max_degree` (capped at 8):
/// the standard families plus some wreath products, so that both primitive and
/// imprimitive groups are well represented.
pub fn transitive_catalog(max_degree: usize) -> Vec<(String, PermGroup)> {
    let max_degree = max_degree.min(8);
    let mut out = Vec::new();
    for n in 2..=max_degree {
        out.push((format!("S({n})"), symmetric(n)));
        if n >= 3 {
            out.push((format!("A({n})"), alternating(n)));
        }
        out.push((format!("C({n})"), cyclic(n)));
        if n >= 4 {
            out.push((format!("D({})", 2 * n), dihedral(n)));
        }
        if n == 4 {
            out.push(("V4".into(), klein_four()));
        }
        if n == 5 {
            out.push(("F20".into(), frobenius20()));
        }
    }
    let s2 = symmetric(2);
    let c2 = cyclic(2);
    let s3 = symmetric(3);
    let s4 = symmetric(4);
    let c3 = cyclic(3);
    let wreaths: Vec<(String, PermGroup)> = vec![
        ("(S(2) wr S(2))".into(), products::wreath_imprimitive(&s2, &s2).unwrap()),
        ("(S(3) wr S(2))".into(), products::wreath_imprimitive(&s3, &s2).unwrap()),
        ("(S(2) wr S(3))".into(), products::wreath_imprimitive(&s2, &s3).unwrap()),
        ("(C(3) wr C(2))".into(), products::wreath_imprimitive(&c3, &c2).unwrap()),
        ("(S(4) wr S(2))".into(), products::wreath_imprimitive(&s4, &s2).unwrap()),
        ("(S(2) wr S(4))".into(), products::wreath_imprimitive(&s2, &s4).unwrap()),
        ("(S(2) pwr S(2))".into(), products::wreath_product_action(&s2, &s2, 4096).unwrap()),
        ("(S(2) pwr S(3))".into(), products::wreath_product_action(&s2, &s3, 4096).unwrap()),
        ("(C(2) pwr C(3))".into(), products::wreath_product_action(&c2, &c3, 4096).unwrap()),
    ];
    out.extend(wreaths.into_iter().filter(|(_, g)| g.degree() <= max_degree));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders() {
        assert_eq!(alternating(4).order(), 12);
        assert_eq!(alternating(5).order(), 60);
        assert_eq!(alternating(6).order(), 360);
        assert_eq!(alternating(3).order(), 3);
        assert_eq!(dihedral(5).order(), 10);
        assert_eq!(frobenius20().order(), 20);
        assert_eq!(klein_four().order(), 4);
        assert_eq!(symmetric(1).order(), 1);
    }

    #[test]
    fn catalog_is_transitive() {
        let cat = transitive_catalog(8);
        assert!(cat.len() > 30);
        for (name, g) in &cat {
            assert!(g.is_transitive(), "{name}");
            assert!(g.degree() <= 8);
        }
        for (name, g) in transitive_up_to_5() {
            assert!(g.is_transitive(), "{name}");
        }
    }

    #[test]
    fn atom_lookup() {
        assert_eq!(atom("D", Some(8)).unwrap().order(), 8);
        assert!(atom("D", Some(5)).is_err());
        assert!(atom("Q", Some(8)).is_err());
        assert!(atom("S", None).is_err());
    }
}
