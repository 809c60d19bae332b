use crate::{dot, norm};

/// Which chart of the frame is in use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `d_1 > -|d|/2`
    Plus,
    /// `-d_1 > -|d|/2`
    Minus,
    /// `d = 0`: canonical basis.
    Canonical,
}

impl Branch {
    fn contains(&self, d: &[f64]) -> bool {
        let r = norm(d);
        match self {
            Branch::Plus => r > 0.0 && d[0] > -r / 2.0,
            Branch::Minus => r > 0.0 && -d[0] > -r / 2.0,
            Branch::Canonical => r == 0.0,
        }
    }
}

/// Orthonormal frame `(e_1, ..., e_N)` with `e_1 = d / |d|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub e: Vec<Vec<f64>>,
    pub branch: Branch,
}

/// Minimal rotation taking the unit vector `a` to the unit vector `u`, applied to `v`:
/// `R v = v + (u a^T - a u^T) v + (u a^T - a u^T)^2 v / (1 + a . u)`.
fn rotate(a: &[f64], u: &[f64], v: &[f64]) -> Vec<f64> {
    let c = dot(a, u);
    let av = dot(a, v);
    let uv = dot(u, v);
    // K v = u (a.v) - a (u.v); K^2 v = u (a.K v) - a (u.K v)
    let kv: Vec<f64> = u.iter().zip(a).map(|(ui, ai)| ui * av - ai * uv).collect();
    let akv = dot(a, &kv);
    let ukv = dot(u, &kv);
    v.iter()
        .zip(&kv)
        .zip(u.iter().zip(a))
        .map(|((vi, kvi), (ui, ai))| vi + kvi + (ui * akv - ai * ukv) / (1.0 + c))
        .collect()
}

/// Frame for `d`, keeping `prev` while `d` stays in its domain.
pub fn frame(d: &[f64], prev: Option<Branch>) -> Frame {
    let n = d.len();
    let r = norm(d);
    let canon = |i: usize| -> Vec<f64> { (0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect() };
    if r == 0.0 {
        return Frame {
            e: (0..n).map(canon).collect(),
            branch: Branch::Canonical,
        };
    }
    let branch = match prev {
        Some(b) if b != Branch::Canonical && b.contains(d) => b,
        _ => {
            if Branch::Plus.contains(d) {
                Branch::Plus
            } else {
                Branch::Minus
            }
        }
    };
    let u: Vec<f64> = d.iter().map(|x| x / r).collect();
    let mut a = canon(0);
    if branch == Branch::Minus {
        a[0] = -1.0;
    }
    let mut e = vec![u.clone()];
    for i in 1..n {
        e.push(rotate(&a, &u, &canon(i)));
    }
    Frame { e, branch }
}
