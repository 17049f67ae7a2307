//! One function per experiment, each producing the rows of one seed.

use mera_qec::channel::{build_transfer_operator, check_rg_regular, spectral_decomposition};
use mera_qec::dynamics::{self, Evolver, LocalHamiltonian};
use mera_qec::haar::{derive_seed, random_density, random_pure_state, random_unitary};
use mera_qec::linalg::{max_abs, state_violation, CMat};
use mera_qec::mera::{purified_top, LocalOperator, MeraNetwork, Region, ScaleState};
use mera_qec::qec::bounds::shield;
use mera_qec::qec::identities::random_local_operator;
use mera_qec::qec::{
    clustering_identity, decoupling_defect, distance_exponent, evaluation_identity, petz_recovery, product_identity,
    recovery_error, uberholography_partition, union_correctability, verify_decoupling_bound, verify_local_correctability,
    BoundReport, CodeSpec, CodewordSampler, DefectOperator, IdentityCheck, QecError,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{Experiment, ExperimentConfig};
use crate::CliError;

/// Tolerance of the spectral contract.
pub const SPECTRAL_TOL: f64 = 1e-8;
/// Tolerance of the renormalization and δ-cancellation identities.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Tolerance of the eigenstate commutator symmetry.
pub const EIGENSTATE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    Violated,
    NotRegular,
    /// Parameters outside an operation's hypothesis.
    Skipped,
    Error,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Violated => "violated",
            Status::NotRegular => "not-regular",
            Status::Skipped => "skipped",
            Status::Error => "error",
        }
    }
}

/// Rows and status of one seed (or of the single seedless run).
#[derive(Clone, Debug, PartialEq)]
pub struct SeedRun {
    pub seed: Option<u64>,
    pub status: Status,
    pub detail: String,
    pub rows: Vec<Vec<Value>>,
    pub violations: usize,
}

impl SeedRun {
    fn new(seed: Option<u64>) -> Self {
        Self { seed, status: Status::Ok, detail: String::new(), rows: Vec::new(), violations: 0 }
    }

    /// Adds a row whose status is known; violated rows count.
    fn push(&mut self, status: Status, row: Vec<Value>) {
        if status == Status::Violated {
            self.violations += 1;
        }
        self.rows.push(row);
    }

    fn note(&mut self, text: impl Into<String>) {
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        self.detail.push_str(&text.into());
    }

    fn finish(mut self) -> Self {
        if self.violations > 0 {
            self.status = Status::Violated;
        }
        self
    }
}

pub fn columns(exp: Experiment) -> &'static [&'static str] {
    match exp {
        Experiment::Spectrum => &[
            "seed",
            "status",
            "is_regular",
            "defective",
            "nu",
            "modulus_exponent",
            "lambda1_re",
            "lambda1_im",
            "spectral_radius",
            "lambda0_defect",
            "left0_defect",
            "right0_valid",
            "reconstruction_residual",
            "condition",
            "contract",
        ],
        Experiment::Decoupling => &["seed", "s", "a_size", "status", "defect", "bound", "margin", "satisfied", "nu"],
        Experiment::LocalCorrectability => {
            &["seed", "s", "a_size", "x", "status", "error", "bound", "margin", "satisfied", "nu"]
        }
        Experiment::Union => &["seed", "s", "x", "status", "joint", "sum", "margin", "satisfied"],
        Experiment::Distance => &[
            "z",
            "alpha",
            "level",
            "status",
            "pieces",
            "expected_pieces",
            "min_size",
            "max_size",
            "ideal_size",
            "within_envelope",
            "satisfied",
        ],
        Experiment::Lightcone => &[
            "seed",
            "status",
            "t",
            "lhs",
            "rhs",
            "nu",
            "v",
            "xi",
            "c_prime",
            "satisfied",
            "delta_residual",
            "eigen_swapped_residual",
            "eigen_reversed_residual",
        ],
        Experiment::Identities => {
            &["seed", "identity", "status", "fine_re", "fine_im", "coarse_re", "coarse_im", "residual", "satisfied"]
        }
    }
}

/// Columns copied into the plotting file.
pub fn plot_columns(exp: Experiment) -> &'static [&'static str] {
    match exp {
        Experiment::Spectrum => &["seed", "nu", "modulus_exponent", "spectral_radius"],
        Experiment::Decoupling => &["seed", "s", "a_size", "defect", "bound"],
        Experiment::LocalCorrectability => &["seed", "s", "x", "error", "bound"],
        Experiment::Union => &["seed", "x", "joint", "sum"],
        Experiment::Distance => &["z", "level", "pieces", "ideal_size", "min_size", "max_size"],
        Experiment::Lightcone => &["seed", "t", "lhs", "rhs", "nu", "v", "xi", "c_prime", "satisfied"],
        Experiment::Identities => &["seed", "identity", "residual"],
    }
}

pub fn run_seed(cfg: &ExperimentConfig, seed: Option<u64>) -> SeedRun {
    let mut out = SeedRun::new(seed);
    let s = seed.unwrap_or(0);
    let result = match cfg.experiment {
        Experiment::Spectrum => spectrum(cfg, s, &mut out),
        Experiment::Decoupling => decoupling(cfg, s, &mut out),
        Experiment::LocalCorrectability => local(cfg, s, &mut out),
        Experiment::Union => union(cfg, s, &mut out),
        Experiment::Distance => distance(cfg, &mut out),
        Experiment::Lightcone => lightcone(cfg, s, &mut out),
        Experiment::Identities => identities(cfg, s, &mut out),
    };
    if let Err(e) = result {
        let not_regular = matches!(
            e,
            CliError::Qec(QecError::NotRegular(_)) | CliError::Dynamics(dynamics::DynamicsError::Qec(QecError::NotRegular(_)))
        );
        out.status = if not_regular { Status::NotRegular } else { Status::Error };
        out.note(e.to_string());
        let width = columns(cfg.experiment).len();
        let mut row = vec![Value::Null; width];
        if cfg.experiment.uses_seeds() {
            row[0] = json!(s);
        }
        let status_col = columns(cfg.experiment).iter().position(|c| *c == "status").expect("status column");
        row[status_col] = json!(out.status.name());
        out.rows.push(row);
        return out;
    }
    out.finish()
}

fn scales(cfg: &ExperimentConfig, net: &MeraNetwork) -> Vec<usize> {
    if cfg.sweep.scales.is_empty() {
        vec![net.num_layers()]
    } else {
        cfg.sweep.scales.clone()
    }
}

fn code(cfg: &ExperimentConfig, net: &MeraNetwork, s: usize, seed: u64) -> Result<CodeSpec, CliError> {
    let sampler = CodewordSampler { maximally_entangled: true, random_pure: cfg.sweep.codewords, seed };
    Ok(CodeSpec::new(net.clone(), s, sampler)?)
}

fn bound_status(r: &BoundReport) -> Status {
    if r.satisfied {
        Status::Ok
    } else {
        Status::Violated
    }
}

fn spectrum(cfg: &ExperimentConfig, seed: u64, out: &mut SeedRun) -> Result<(), CliError> {
    let net = cfg.network.build(seed)?;
    let ch = build_transfer_operator(&net)?;
    let sd = spectral_decomposition(&ch)?;
    let rg = check_rg_regular(&sd, 1e-10);
    let lambda0_defect = (sd.eigenvalues[0] - 1.0).norm();
    let id = CMat::identity(sd.dim, sd.dim);
    let left0_defect = max_abs(&(&sd.left_ops[0] - id));
    let right0_valid = state_violation(&sd.right_ops[0], SPECTRAL_TOL).is_none();
    let residual = sd.reconstruction_residual(&ch);
    let radius = sd.spectral_radius();
    // with several unit eigenvalues the fixed point is not unique and the
    // first eigenpair need not be (I, state)
    let unique_fixed_point = sd.eigenvalues.iter().filter(|z| z.norm() >= 1.0 - 1e-10).count() == 1;
    let contract = radius <= 1.0 + 1e-10
        && lambda0_defect <= SPECTRAL_TOL
        && (!unique_fixed_point || (left0_defect <= SPECTRAL_TOL && right0_valid))
        && residual.is_none_or(|r| r < SPECTRAL_TOL);
    let status = if !contract {
        Status::Violated
    } else if !rg.is_regular {
        out.note(rg.reasons.join("; "));
        Status::NotRegular
    } else {
        Status::Ok
    };
    if status == Status::NotRegular {
        out.status = Status::NotRegular;
    }
    let l1 = sd.eigenvalues.get(1).copied();
    out.push(
        status,
        vec![
            json!(seed),
            json!(status.name()),
            json!(rg.is_regular),
            json!(sd.defective),
            json!(rg.nu),
            json!(sd.modulus_exponent()),
            json!(l1.map(|z| z.re)),
            json!(l1.map(|z| z.im)),
            json!(radius),
            json!(lambda0_defect),
            json!(left0_defect),
            json!(right0_valid),
            json!(residual),
            json!(sd.condition),
            json!(contract),
        ],
    );
    Ok(())
}

fn decoupling(cfg: &ExperimentConfig, seed: u64, out: &mut SeedRun) -> Result<(), CliError> {
    let net = cfg.network.build(seed)?;
    let n = net.n_phys();
    let op = DefectOperator::WorstSampled { samples: cfg.sweep.defect_samples, seed };
    for s in scales(cfg, &net) {
        let code = code(cfg, &net, s, seed)?;
        for &size in cfg.sweep.region_sizes.iter().filter(|&&k| k < n) {
            let a = Region::interval(0, n, 0, size)?;
            match verify_decoupling_bound(&code, &a, &op) {
                Ok(r) => {
                    let st = bound_status(&r);
                    out.push(
                        st,
                        vec![
                            json!(seed),
                            json!(s),
                            json!(size),
                            json!(st.name()),
                            json!(r.lhs),
                            json!(r.rhs),
                            json!(r.margin),
                            json!(r.satisfied),
                            json!(r.constants.nu),
                        ],
                    );
                }
                Err(QecError::NotRegular(why)) => {
                    out.status = Status::NotRegular;
                    out.note(why);
                    let d = decoupling_defect(&code, &a, &op)?.defect;
                    let st = Status::NotRegular;
                    out.push(
                        st,
                        vec![json!(seed), json!(s), json!(size), json!(st.name()), json!(d), Value::Null, Value::Null, Value::Null, Value::Null],
                    );
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(())
}

fn local(cfg: &ExperimentConfig, seed: u64, out: &mut SeedRun) -> Result<(), CliError> {
    let net = cfg.network.build(seed)?;
    let n = net.n_phys();
    for s in scales(cfg, &net) {
        let code = code(cfg, &net, s, seed)?;
        for &size in cfg.sweep.region_sizes.iter().filter(|&&k| k < n) {
            let a = Region::interval(0, n, 0, size)?;
            for &x in &cfg.sweep.shield_radii {
                let head = [json!(seed), json!(s), json!(size), json!(x)];
                let (st, vals) = match verify_local_correctability(&code, &a, x) {
                    Ok(r) => {
                        let st = bound_status(&r);
                        (st, [json!(r.lhs), json!(r.rhs), json!(r.margin), json!(r.satisfied), json!(r.constants.nu)])
                    }
                    Err(QecError::NotRegular(why)) => {
                        out.status = Status::NotRegular;
                        out.note(why);
                        let err = recovery_error(&code, &petz_recovery(&code, &a, &shield(&a, x))?)?.max;
                        (Status::NotRegular, [json!(err), Value::Null, Value::Null, Value::Null, Value::Null])
                    }
                    Err(e @ QecError::Hypothesis { .. }) => {
                        out.note(format!("x={x}: {e}"));
                        (Status::Skipped, [Value::Null, Value::Null, Value::Null, Value::Null, Value::Null])
                    }
                    Err(e) => return Err(e.into()),
                };
                let mut row = head.to_vec();
                row.push(json!(st.name()));
                row.extend(vals);
                out.push(st, row);
            }
        }
    }
    Ok(())
}

fn union(cfg: &ExperimentConfig, seed: u64, out: &mut SeedRun) -> Result<(), CliError> {
    let net = cfg.network.build(seed)?;
    let n = net.n_phys();
    for s in scales(cfg, &net) {
        let code = code(cfg, &net, s, seed)?;
        for &x in &cfg.sweep.shield_radii {
            let a1 = Region::new(0, n, vec![0])?;
            let a2 = Region::new(0, n, vec![n / 2])?;
            let (b1, b2) = (shield(&a1, x), shield(&a2, x));
            if a1.union(&b1).intersects(&a2.union(&b2)) {
                out.note(format!("x={x}: shields overlap"));
                let st = Status::Skipped;
                out.push(st, vec![json!(seed), json!(s), json!(x), json!(st.name()), Value::Null, Value::Null, Value::Null, Value::Null]);
                continue;
            }
            let r = union_correctability(&code, &a1, &b1, &a2, &b2)?;
            let st = bound_status(&r);
            out.push(
                st,
                vec![json!(seed), json!(s), json!(x), json!(st.name()), json!(r.lhs), json!(r.rhs), json!(r.margin), json!(r.satisfied)],
            );
        }
    }
    Ok(())
}

fn distance(cfg: &ExperimentConfig, out: &mut SeedRun) -> Result<(), CliError> {
    let len = cfg.sweep.ab_size;
    let ab = Region::interval(0, 2 * len, 0, len)?;
    for &z in &cfg.sweep.z {
        let alpha = distance_exponent(z)?;
        for g in 0..=cfg.sweep.levels {
            let expected = 1usize << g;
            match uberholography_partition(&ab, z, g) {
                Ok(p) => {
                    let sizes: Vec<usize> = p.pieces().iter().map(Region::len).collect();
                    let ok = sizes.len() == expected && p.within_envelope;
                    let st = if ok { Status::Ok } else { Status::Violated };
                    out.push(
                        st,
                        vec![
                            json!(z),
                            json!(alpha),
                            json!(g),
                            json!(st.name()),
                            json!(sizes.len()),
                            json!(expected),
                            json!(sizes.iter().min()),
                            json!(sizes.iter().max()),
                            json!(p.ideal_size),
                            json!(p.within_envelope),
                            json!(ok),
                        ],
                    );
                }
                Err(e @ QecError::Depth { .. }) => {
                    out.note(format!("z={z}: {e}"));
                    let st = Status::Skipped;
                    let mut row = vec![json!(z), json!(alpha), json!(g), json!(st.name()), Value::Null, json!(expected)];
                    row.extend(std::iter::repeat_n(Value::Null, 5));
                    out.push(st, row);
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(())
}

fn pauli_z() -> CMat {
    CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0.into(), (-1.0).into()]))
}

fn lightcone(cfg: &ExperimentConfig, seed: u64, out: &mut SeedRun) -> Result<(), CliError> {
    let net = cfg.network.build(seed)?;
    let n = net.n_phys();
    let s = *scales(cfg, &net).first().expect("a scale");
    let code = code(cfg, &net, s, seed)?;
    let h = LocalHamiltonian::heisenberg(n, true)?;
    let o1 = dynamics::pauli_operator('X', 0, n)?;
    let o2_s = LocalOperator::new(Region::new(s, net.n_sites(s), vec![0])?, 2, 1, pauli_z())?;
    let ls: Vec<usize> = (1..).take_while(|&l| 2 * l + 1 < n).collect();
    let ts: Vec<f64> = cfg.sweep.t_grid.iter().copied().filter(|t| *t != 0.0).collect();
    let lr = dynamics::fit_lieb_robinson(&dynamics::lr_samples(&h, &o1, &ls, &ts)?)?;
    let dim = code.logical_dim()?;
    let rho = random_pure_state(dim, derive_seed(seed, 200));
    let sigma = random_pure_state(dim, derive_seed(seed, 201));
    let rep = dynamics::verify_lightcone_bound(&code, &h, &o1, &o2_s, &cfg.sweep.t_grid, &lr, &rho, &sigma)?;
    let delta_ok = rep.delta.residual <= IDENTITY_TOL;
    if !delta_ok {
        out.note(format!("delta identity residual {:.3e}", rep.delta.residual));
    }

    let evolver = Evolver::full(&h)?;
    let hd = h.dense()?;
    let psi = evolver.eigenstate(0);
    let full = h.full_region();
    let o1_full = o1.extend_to(&full)?.into_matrix();
    let o2_full = dynamics::logical_operator(&net, s, &o2_s)?.matrix;
    for row in &rep.rows {
        let chk = dynamics::eigenstate_commutators(&evolver, &hd, &o1_full, &o2_full, &psi, row.t);
        let eigen_ok = chk.swapped_residual() <= EIGENSTATE_TOL;
        let st = if row.satisfied && delta_ok && eigen_ok { Status::Ok } else { Status::Violated };
        out.push(
            st,
            vec![
                json!(seed),
                json!(st.name()),
                json!(row.t),
                json!(row.lhs),
                json!(row.rhs),
                json!(rep.nu),
                json!(lr.v),
                json!(lr.xi),
                json!(rep.c_prime),
                json!(row.satisfied),
                json!(rep.delta.residual),
                json!(chk.swapped_residual()),
                json!(chk.reversed_residual()),
            ],
        );
    }
    Ok(())
}

fn identity_row(seed: u64, chk: &IdentityCheck) -> (Status, Vec<Value>) {
    let ok = chk.residual <= IDENTITY_TOL;
    let st = if ok { Status::Ok } else { Status::Violated };
    let row = vec![
        json!(seed),
        json!(chk.name),
        json!(st.name()),
        json!(chk.fine.re),
        json!(chk.fine.im),
        json!(chk.coarse.re),
        json!(chk.coarse.im),
        json!(chk.residual),
        json!(ok),
    ];
    (st, row)
}

/// Evaluation, product-of-marginals and clustering identities for one seed.
pub fn identity_checks(net: &MeraNetwork, s: usize, seed: u64) -> Result<Vec<IdentityCheck>, CliError> {
    let n = net.n_phys();
    let dim = net.dense_dim(s)?;
    let rho = ScaleState::new(net, s, 1, random_pure_state(dim, derive_seed(seed, 10)))?;
    let sigma = ScaleState::new(net, s, 1, random_pure_state(dim, derive_seed(seed, 11)))?;
    let op = random_local_operator(Region::interval(0, n, 0, 2)?, net.site_dim(), 1, derive_seed(seed, 12));
    let mut out = vec![evaluation_identity(net, &rho, &sigma, &op)?];

    let mixed = random_density(dim, derive_seed(seed, 13));
    let u = random_unitary(dim, derive_seed(seed, 14));
    let top = purified_top(net, &mixed, Some(&u), s)?;
    let a = Region::interval(0, n, (n / 4) as isize, 2)?;
    let op = random_local_operator(a.clone(), net.site_dim(), top.aux_dim, derive_seed(seed, 15));
    out.push(product_identity(net, &top, &a, &op)?);

    let a = Region::new(0, n, vec![0])?;
    let c = Region::new(0, n, vec![n / 2])?;
    let op = random_local_operator(a.union(&c), net.site_dim(), top.aux_dim, derive_seed(seed, 16));
    out.push(clustering_identity(net, &top, &a, &c, s.min(2), &op)?);
    Ok(out)
}

fn identities(cfg: &ExperimentConfig, seed: u64, out: &mut SeedRun) -> Result<(), CliError> {
    let net = cfg.network.build(seed)?;
    let s = *scales(cfg, &net).first().expect("a scale");
    for chk in identity_checks(&net, s, seed)? {
        let (st, row) = identity_row(seed, &chk);
        out.push(st, row);
    }
    Ok(())
}
