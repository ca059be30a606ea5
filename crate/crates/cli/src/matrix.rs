//! Coverage matrix: each result the toolkit checks, the operation computing
//! it, the command that reaches it and the test exercising it.

pub struct Row {
    pub anchor: &'static str,
    pub op: &'static str,
    pub command: &'static str,
    /// `file::test` under `crates/core/tests`.
    pub test: &'static str,
}

const fn row(
    anchor: &'static str,
    op: &'static str,
    command: &'static str,
    test: &'static str,
) -> Row {
    Row {
        anchor,
        op,
        command,
        test,
    }
}

pub const ROWS: &[Row] = &[
    row(
        "packing norm over disjoint ball collections",
        "packing::v_eval",
        "norm",
        "packing.rs::norms_scale_linearly",
    ),
    row(
        "lattice estimate of the packing norm",
        "packing::vnorm_lattice",
        "norm",
        "acceptance.rs::c04_weak_norm_dominated_by_lattice_packing_norm",
    ),
    row(
        "greedy lower bound below the exhaustive maximum",
        "packing::vnorm_greedy",
        "norm",
        "acceptance.rs::c01_greedy_matches_exhaustive_search",
    ),
    row(
        "exhaustive maximum on small universes",
        "packing::vnorm_bruteforce",
        "norm",
        "packing.rs::greedy_never_beats_exhaustive",
    ),
    row(
        "monotonicity under adding disjoint balls",
        "packing::v_eval",
        "norm",
        "packing.rs::adding_a_disjoint_ball_never_decreases",
    ),
    row(
        "interpolation between q = p and q = infinity",
        "packing::ladder_report",
        "ladder",
        "acceptance.rs::c02_interpolation_and_holder_inequalities",
    ),
    row(
        "Hölder bound by the L^p norm",
        "packing::holder_sides",
        "ladder",
        "acceptance.rs::c02_interpolation_and_holder_inequalities",
    ),
    row(
        "ordering of the ladder in q",
        "packing::ladder_report",
        "ladder",
        "acceptance.rs::c02_interpolation_and_holder_inequalities",
    ),
    row(
        "power singularity: packing sums grow, Morrey stays bounded",
        "packing::morrey_norm",
        "ladder",
        "acceptance.rs::c03_power_singularity_separates_packing_from_morrey",
    ),
    row(
        "Morrey norm as a supremum of single-ball terms",
        "packing::morrey_norm",
        "norm",
        "packing.rs::morrey_equals_sup_of_single_ball_terms",
    ),
    row(
        "Haar projection tracks the lattice norm",
        "packing::haar_projection_lp",
        "norm",
        "packing.rs::haar_projection_tracks_lattice_norm",
    ),
    row(
        "packing measure of a space-filling set diverges",
        "packing::packing_measure_estimate",
        "sim3d",
        "packing.rs::full_cube_packing_measure_diverges",
    ),
    row(
        "weak Lorentz norm dominated by the packing norm",
        "rearrange::lorentz_zygmund_norm",
        "norm",
        "acceptance.rs::c04_weak_norm_dominated_by_lattice_packing_norm",
    ),
    row(
        "maximal profile dominates the rearrangement",
        "rearrange::rearrange",
        "norm",
        "rearrange.rs::maximal_profile_dominates_star_profile",
    ),
    row(
        "weak norm below the strong norm",
        "rearrange::lorentz_zygmund_norm",
        "norm",
        "rearrange.rs::weak_norm_below_strong_norm",
    ),
    row(
        "Haar Parseval identity",
        "wavelet::haar_decompose",
        "wavelet",
        "wavelet.rs::parseval_holds",
    ),
    row(
        "H^-1 upper bound within the calibrated band",
        "wavelet::hneg1_upper",
        "wavelet",
        "acceptance.rs::c05_wavelet_parseval_and_hneg1_band",
    ),
    row(
        "Dirac level-energy slope equals the dimension",
        "wavelet::decay_check",
        "wavelet",
        "acceptance.rs::c06_dirac_slopes_and_flat_borderline_tail",
    ),
    row(
        "flat tail at the borderline exponent",
        "wavelet::tail_exponent",
        "wavelet",
        "wavelet.rs::unit_density_line_has_flat_level_terms",
    ),
    row(
        "coefficient decay shape of smooth data",
        "wavelet::decay_check",
        "wavelet",
        "wavelet.rs::smooth_data_sits_below_the_decay_shape",
    ),
    row(
        "compact embedding into negative Besov spaces",
        "wavelet::embedding_verdict",
        "embed",
        "wavelet.rs::embedding_thresholds",
    ),
    row(
        "Besov norm from Haar levels",
        "wavelet::besov_norm",
        "norm",
        "wavelet.rs::positive_smoothness_is_rejected",
    ),
    row(
        "co-rotating pair period and invariants",
        "euler2d::evolve",
        "sim2d",
        "acceptance.rs::c07_corotating_pair_period_and_invariants",
    ),
    row(
        "uniform patch self-energy",
        "euler2d::patch_self_energy",
        "sim2d",
        "euler2d.rs::patch_self_energy_matches_pair_average",
    ),
    row(
        "pseudo-energy split into self-induced and interaction parts",
        "euler2d::energy_partition",
        "sim2d",
        "euler2d.rs::partition_reassembles_energy",
    ),
    row(
        "one-signed V-bound chain from energy and moments",
        "euler2d::one_signed_chain",
        "sim2d",
        "acceptance.rs::c08_one_signed_bound_chain",
    ),
    row(
        "concentration of the vortex energy at the origin",
        "euler2d::concentration_check",
        "dmj",
        "acceptance.rs::c09_dmj_energy_concentrates_at_the_origin",
    ),
    row(
        "reduced defect measure of a concentrating family",
        "euler2d::reduced_defect",
        "dmj",
        "euler2d.rs::defect_concentrates_at_the_origin",
    ),
    row(
        "weak formulation residual of steady vortices",
        "euler2d::weak_residual",
        "dmj",
        "euler2d.rs::steady_dmj_has_small_weak_residual",
    ),
    row(
        "near-diagonal quadratic term bound and log decay",
        "euler2d::jdelta_split",
        "sim2d",
        "acceptance.rs::c10_near_diagonal_term_bound_and_decay",
    ),
    row(
        "bounded kernel of the quadratic term",
        "euler2d::delort_kernel",
        "sim2d",
        "euler2d.rs::delort_kernel_bounded_by_hessian",
    ),
    row(
        "Coulomb energy of 3D vorticity",
        "euler3d::coulomb_energy",
        "sim3d",
        "euler3d.rs::gaussian_energies_match_closed_form",
    ),
    row(
        "near/far split of the Coulomb energy",
        "euler3d::partition_delta",
        "sim3d",
        "euler3d.rs::partition_and_split_are_exact",
    ),
    row(
        "Fourier form of the near energy",
        "euler3d::hsi_fourier",
        "sim3d",
        "acceptance.rs::c11_spectral_and_spatial_near_energy_agree",
    ),
    row(
        "local alignment of the vorticity direction",
        "euler3d::alignment_measure",
        "sim3d",
        "euler3d.rs::alignment_scan_matches_naive_pairs",
    ),
    row(
        "height split of the vorticity",
        "euler3d::split_height",
        "sim3d",
        "euler3d.rs::height_split_edges",
    ),
    row(
        "weighted Cauchy-Schwarz for the near energy",
        "euler3d::near_pair_energy",
        "sim3d",
        "euler3d.rs::weighted_cauchy_schwarz",
    ),
    row(
        "energy bound on the packing norm of the unbounded part",
        "euler3d::bound_chain",
        "sim3d",
        "acceptance.rs::c12_energy_to_packing_bound_chain",
    ),
    row(
        "lower bound scales with one minus the squared defect",
        "euler3d::bound_chain",
        "sim3d",
        "euler3d.rs::lower_bound_scales_with_alignment_factor",
    ),
    row(
        "packing norm bounded by packing measure times Morrey norm",
        "euler3d::morrey_vs_v_check",
        "sim3d",
        "euler3d.rs::filament_and_single_atom_satisfy_the_morrey_comparison",
    ),
];

/// Fixed-width text table in `ROWS` order.
pub fn coverage_matrix() -> String {
    let w0 = ROWS
        .iter()
        .map(|r| r.anchor.chars().count())
        .max()
        .unwrap_or(0);
    let w1 = ROWS.iter().map(|r| r.op.len()).max().unwrap_or(0);
    let mut out = format!(
        "{:<w0$}  {:<w1$}  {:<7}  test\n",
        "result", "operation", "command"
    );
    for r in ROWS {
        let pad = w0 - r.anchor.chars().count();
        out += &format!(
            "{}{}  {:<w1$}  {:<7}  {}\n",
            r.anchor,
            " ".repeat(pad),
            r.op,
            r.command,
            r.test
        );
    }
    out
}
