//! Fixture generation with brute-force-certified promise stamps. Every
//! randomized fixture carries its seed, the exact squared first minimum and
//! target distance (stamped by the exact solvers), and is re-verified on
//! load as a tamper check.

use crate::error::Error;
use crate::json::{LatticeFile, TargetFile};
use crate::lattice::{Basis, Target};
use crate::rational::{self, format_rat, parse_rat, Rat};
use crate::reductions::rational_sqrt_approx;
use crate::rng::SeedTree;
use crate::solvers::{cvp_exact, svp_exact, EnumerationCaps};
use num_traits::{Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixtureKind {
    /// dist(t, L) <= d (~ sqrt(n)/gamma after normal-form scaling).
    ClosePromise,
    /// dist^2 > margin_sq * n and lambda_1^2 > margin_sq * n, exactly.
    FarPromise,
    /// No promise; stamps are informational.
    Random,
    /// ceil(sqrt(n)) Z^n with lambda_1 stamped exactly.
    ScaledZn,
}

/// A CVP'-normal-form instance: lattice, target, approximation factor, and
/// the rational CLOSE threshold d ~ sqrt(n)/gamma.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub kind: FixtureKind,
    pub basis: Basis,
    pub target: Target,
    pub gamma: Rat,
    pub d: Rat,
    pub lambda1_sq: Rat,
    pub dist_sq: Rat,
    pub margin_sq: Rat,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FixtureFile {
    pub kind: FixtureKind,
    pub n: usize,
    pub gamma: String,
    pub d: String,
    pub margin_sq: String,
    pub seed: u64,
    pub lattice: LatticeFile,
    pub target: TargetFile,
    pub promise: PromiseStamp,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PromiseStamp {
    pub lambda1_sq: String,
    pub dist_sq: String,
}

impl Fixture {
    pub fn to_file(&self) -> FixtureFile {
        FixtureFile {
            kind: self.kind,
            n: self.basis.n(),
            gamma: format_rat(&self.gamma),
            d: format_rat(&self.d),
            margin_sq: format_rat(&self.margin_sq),
            seed: self.seed,
            lattice: LatticeFile::from_basis(&self.basis),
            target: TargetFile::from_target(&self.target),
            promise: PromiseStamp {
                lambda1_sq: format_rat(&self.lambda1_sq),
                dist_sq: format_rat(&self.dist_sq),
            },
        }
    }
}

impl FixtureFile {
    /// Parses and re-verifies the promise stamps with the exact solvers;
    /// any mismatch is a `PromiseViolation`.
    pub fn load_verified(&self, caps: EnumerationCaps) -> Result<Fixture, Error> {
        let basis = self.lattice.to_basis()?;
        let target = self.target.to_target()?;
        let fixture = Fixture {
            kind: self.kind,
            basis,
            target,
            gamma: parse_rat(&self.gamma)?,
            d: parse_rat(&self.d)?,
            lambda1_sq: parse_rat(&self.promise.lambda1_sq)?,
            dist_sq: parse_rat(&self.promise.dist_sq)?,
            margin_sq: parse_rat(&self.margin_sq)?,
            seed: self.seed,
        };
        verify_fixture(&fixture, caps)?;
        Ok(fixture)
    }
}

/// Recomputes the stamps and checks the promise appropriate to the kind.
pub fn verify_fixture(f: &Fixture, caps: EnumerationCaps) -> Result<(), Error> {
    let sv = svp_exact(&f.basis, None, caps)?;
    if sv.lambda1_sq != f.lambda1_sq {
        return Err(Error::PromiseViolation(format!(
            "stamped lambda1_sq {} but solver found {}",
            format_rat(&f.lambda1_sq),
            format_rat(&sv.lambda1_sq)
        )));
    }
    let cv = cvp_exact(&f.basis, &f.target, caps)?;
    if cv.dist_sq != f.dist_sq {
        return Err(Error::PromiseViolation(format!(
            "stamped dist_sq {} but solver found {}",
            format_rat(&f.dist_sq),
            format_rat(&cv.dist_sq)
        )));
    }
    let n_rat = rational::rat_int(f.basis.n() as i64);
    match f.kind {
        FixtureKind::ClosePromise => {
            if f.dist_sq > &f.d * &f.d {
                return Err(Error::PromiseViolation(
                    "close-promise fixture has dist > d".into(),
                ));
            }
        }
        FixtureKind::FarPromise => {
            let floor = &f.margin_sq * &n_rat;
            if f.dist_sq <= floor || f.lambda1_sq <= floor {
                return Err(Error::PromiseViolation(
                    "far-promise fixture violates dist^2, lambda1^2 > margin_sq * n".into(),
                ));
            }
        }
        FixtureKind::Random | FixtureKind::ScaledZn => {}
    }
    Ok(())
}

/// Random full-rank basis with entries in [-max_entry, max_entry].
pub fn random_basis<R: Rng>(n: usize, max_entry: i64, rng: &mut R) -> Basis {
    loop {
        let cols: Vec<Vec<Rat>> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| rational::rat_int(rng.random_range(-max_entry..=max_entry)))
                    .collect()
            })
            .collect();
        if let Ok(b) = Basis::new(cols) {
            return b;
        }
    }
}

/// Random unimodular transform of a basis (shears + swaps), preserving the
/// lattice but hiding its structure.
pub fn scramble_basis<R: Rng>(basis: &Basis, steps: usize, rng: &mut R) -> Basis {
    let n = basis.n();
    let mut cols = basis.columns().to_vec();
    for _ in 0..steps {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n);
        if i == j {
            j = (j + 1) % n;
        }
        if n == 1 {
            break;
        }
        let c = rng.random_range(-2i64..=2);
        if c != 0 {
            let shift = rational::scale(&cols[j], &rational::rat_int(c));
            cols[i] = rational::add(&cols[i], &shift);
        }
        if rng.random::<bool>() {
            cols.swap(i, j);
        }
    }
    Basis::new(cols).expect("unimodular ops preserve rank")
}

/// d ~ sqrt(n)/gamma as an exact rational (2^-48 approximation of sqrt(n)).
pub fn normal_form_d(n: usize, gamma: &Rat) -> Rat {
    rational_sqrt_approx(&rational::rat_int(n as i64)) / gamma
}

pub fn generate(
    kind: FixtureKind,
    n: usize,
    gamma: &Rat,
    seed: u64,
    caps: EnumerationCaps,
) -> Result<Fixture, Error> {
    if !gamma.is_positive() {
        return Err(Error::InvalidParameter("gamma must be positive".into()));
    }
    let mut rng = SeedTree::new(seed).child(kind as u64).rng();
    let d = normal_form_d(n, gamma);
    let margin_sq = rational::rat_int(2);
    match kind {
        FixtureKind::ClosePromise => {
            // Scale a random lattice up so lambda_1 > sqrt(n) comfortably,
            // then plant a target at distance <= d from a random lattice
            // point.
            for attempt in 0..200 {
                let raw = random_basis(n, 3, &mut rng);
                let sv = svp_exact(&raw, None, caps)?;
                // scale so lambda1^2 >= 4 n: factor^2 = ceil(4n / lambda1^2).
                let ratio = rational::rat_int(4 * n as i64) / &sv.lambda1_sq;
                let factor = rational::rat_int(
                    rational::rat_to_f64(&ratio).sqrt().ceil().max(1.0) as i64,
                );
                let basis = raw.scale(&factor)?;
                // Offset with exact norm <= 0.9 d: random direction, scaled.
                let dir: Vec<Rat> = (0..n)
                    .map(|_| rational::rat_int(rng.random_range(-8i64..=8)))
                    .collect();
                let dir_norm_sq = rational::norm_sq(&dir);
                if dir_norm_sq.is_zero() {
                    continue;
                }
                // offset = dir * (9 d / (10 |dir|)): use rational sqrt approx
                // of |dir|^2, rounding the scale DOWN to keep norm under d.
                let dir_norm = rational_sqrt_approx(&dir_norm_sq) + rational::rat(1, 1 << 20);
                let scale = &d * rational::rat(9, 10) / dir_norm;
                let offset = rational::scale(&dir, &scale);
                let point = basis.lattice_vector(
                    (0..n)
                        .map(|_| num_bigint::BigInt::from(rng.random_range(-2i64..=2)))
                        .collect(),
                );
                let target = Target::new(rational::add(&point.embedding, &offset));
                let cv = cvp_exact(&basis, &target, caps)?;
                if cv.dist_sq > &d * &d {
                    continue;
                }
                let sv = svp_exact(&basis, None, caps)?;
                let f = Fixture {
                    kind,
                    basis,
                    target,
                    gamma: gamma.clone(),
                    d,
                    lambda1_sq: sv.lambda1_sq,
                    dist_sq: cv.dist_sq,
                    margin_sq,
                    seed,
                };
                let _ = attempt;
                return Ok(f);
            }
            Err(Error::RetryExhausted("close fixture generation".into()))
        }
        FixtureKind::FarPromise => {
            // c Z^n presented through a scrambled unimodular basis: lambda_1
            // = c exactly; targets near the deep hole certify dist^2 > 2 n.
            let needed = rational::rat_to_f64(&(&margin_sq * rational::rat_int(n as i64)));
            let c = ((2.0 * needed.sqrt() / (n as f64).sqrt()).ceil() as i64).max(3);
            let plain = Basis::diagonal(&vec![rational::rat_int(c); n])?;
            let basis = scramble_basis(&plain, 4 * n, &mut rng);
            for _ in 0..200 {
                // Jittered deep hole: c/2 (1..1) + small rational noise.
                let target = Target::new(
                    (0..n)
                        .map(|_| {
                            rational::rat(c, 2)
                                + rational::rat(rng.random_range(-8i64..=8), 64)
                        })
                        .collect(),
                );
                let cv = cvp_exact(&basis, &target, caps)?;
                let floor = &margin_sq * rational::rat_int(n as i64);
                if cv.dist_sq <= floor {
                    continue;
                }
                let sv = svp_exact(&basis, None, caps)?;
                debug_assert_eq!(sv.lambda1_sq, rational::rat_int(c * c));
                if sv.lambda1_sq <= floor {
                    continue;
                }
                return Ok(Fixture {
                    kind,
                    basis,
                    target,
                    gamma: gamma.clone(),
                    d,
                    lambda1_sq: sv.lambda1_sq,
                    dist_sq: cv.dist_sq,
                    margin_sq,
                    seed,
                });
            }
            Err(Error::RetryExhausted("far fixture generation".into()))
        }
        FixtureKind::Random => {
            let basis = random_basis(n, 4, &mut rng);
            let target = Target::new(
                (0..n)
                    .map(|_| rational::rat(rng.random_range(-64i64..=64), 16))
                    .collect(),
            );
            let sv = svp_exact(&basis, None, caps)?;
            let cv = cvp_exact(&basis, &target, caps)?;
            Ok(Fixture {
                kind,
                basis,
                target,
                gamma: gamma.clone(),
                d,
                lambda1_sq: sv.lambda1_sq,
                dist_sq: cv.dist_sq,
                margin_sq,
                seed,
            })
        }
        FixtureKind::ScaledZn => {
            let c = (n as f64).sqrt().ceil() as i64;
            let basis = Basis::diagonal(&vec![rational::rat_int(c); n])?;
            let target = Target::new(vec![rational::rat(c, 2); n]);
            let sv = svp_exact(&basis, None, caps)?;
            // lambda_1 = c exactly.
            debug_assert_eq!(sv.lambda1_sq, rational::rat_int(c * c));
            let cv = cvp_exact(&basis, &target, caps)?;
            Ok(Fixture {
                kind,
                basis,
                target,
                gamma: gamma.clone(),
                d,
                lambda1_sq: sv.lambda1_sq,
                dist_sq: cv.dist_sq,
                margin_sq,
                seed,
            })
        }
    }
}
