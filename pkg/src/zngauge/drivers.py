"""Experiment drivers: quench trajectories, verification battery, scans.

Every driver is deterministic under a fixed config and seed, writes one
CSV per observable family plus a manifest, and returns its records so
tests can assert on them without touching the filesystem.  Dense norm
comparisons always run on the 2x2 lattice; larger lattices would need
operator matrices that do not fit.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from importlib import metadata

import numpy as np

from .lattice import (LatticeGeometry, StateVector, ancilla_restoration_fidelity,
                      born_sample, build_global_singlet, build_layout,
                      lift_physical, project_ancillas)
from .algebra import (gauss_expectations, make_link_algebra,
                      random_gauge_invariant_physical, total_hamiltonian)
from .stators import (collision_calibration, eta_couplings, gate_matrix,
                      n0_pair_phase, scattering_lengths_to_couplings,
                      selective_collision, stator_entangler, z3_collision_entangler)
from .schedule import (compile_step, dump_schedule, execute, execute_array,
                       gauge_away_phases, schedule_physical_map, solve_vertex_potential,
                       spurious_phase_field, total_fermion_number)
from .oracle import (ORACLE_DIM_LIMIT, ExactEvolver, diamond_surrogate_distance,
                     exact_norm_sum, bound_validity, trotter_bound)
from .optical import polarization_vectors, shaping_schedule, v_mat_minima, wave_vectors
from .config import SimulationConfig

SCAN_STEPS = (4, 8, 16, 32, 64)
XI_GRID = tuple(float(x) for x in np.linspace(0.02, 0.30, 15))


def _package_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unreleased"


def _fmt(value) -> str:
    if isinstance(value, float):
        return "%.12g" % value
    return str(value)


def write_csv(path: str, header: list[str], rows: list[list]):
    with open(path, "w", encoding="utf-8") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def write_manifest(out_dir: str, config: SimulationConfig, extra: dict | None = None):
    doc = {"config": config.as_dict(), "version": _package_version(),
           "seed": config.seed}
    if extra:
        doc.update(extra)
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def flux_sector_probabilities(state: StateVector) -> dict:
    """Per plaquette, the distribution of the oriented flux label.

    The label is the orientation-weighted sum of the four link clock
    digits mod N; probabilities marginalize everything else out.
    """
    layout = state.layout
    geom = layout.geometry
    N = layout.N
    probs = np.abs(state.amplitudes.reshape(tuple(layout.dims))) ** 2
    out = {}
    for p in geom.plaquettes:
        axes = [layout.link_index(l) for l, _ in geom.plaquette_links(p)]
        orients = [o for _, o in geom.plaquette_links(p)]
        keep = tuple(i for i in range(len(layout.registers)) if i not in axes)
        joint = probs.sum(axis=keep)
        joint = np.moveaxis(joint, np.argsort(np.argsort(axes)), range(4))
        dist = np.zeros(N)
        for idx in np.ndindex(*joint.shape):
            label = sum(o * m for o, m in zip(orients, idx)) % N
            dist[label] += joint[idx]
        out[p] = dist
    return out


def measure_configuration(state: StateVector, seed: int, shots: int) -> dict:
    """Born-rule samples of link flux labels and site occupations.

    Returns arrays keyed 'occupation' (shots x vertices) and 'flux'
    (shots x links) plus the register orderings used for the columns.
    """
    layout = state.layout
    rng = np.random.default_rng(seed)
    digits = born_sample(state, rng, shots)
    geom = layout.geometry
    f_cols = [layout.fermion_index(v) for v in geom.vertices]
    l_cols = [layout.link_index(l) for l in geom.links]
    return {
        "occupation": digits[:, f_cols],
        "flux": digits[:, l_cols],
        "vertices": list(geom.vertices),
        "links": list(geom.links),
    }


def run_quench(config: SimulationConfig, out_dir: str | None = None,
               shots: int = 0) -> list[dict]:
    """Sudden-interaction evolution from the global singlet.

    Records per step: Gauss-law expectation per vertex, total fermion
    number, flux-sector probabilities, ancilla restoration, and (when
    the physical dimension allows dense diagonalization) fidelity
    against the exact propagator.
    """
    layout = config.build_geometry()
    cpl = config.couplings()
    tau = config.T / config.n_steps
    sched = compile_step(layout, cpl, tau, config.mode, config.order,
                         theta=config.theta, theta_prime=config.theta_prime)
    state = build_global_singlet(layout)
    evolver = None
    if layout.physical_dim <= ORACLE_DIM_LIMIT:
        evolver = ExactEvolver(total_hamiltonian(layout, cpl))
        phys0 = project_ancillas(state.amplitudes, layout)
    rows = []
    for k in range(1, config.n_steps + 1):
        state = execute(sched, state)
        gauss = gauss_expectations(state)
        flux = flux_sector_probabilities(state)
        row = {
            "step": k,
            "time": k * tau,
            "gauss_max_deviation": max(abs(v - 1.0) for v in gauss.values()),
            "fermion_number": total_fermion_number(state),
            "ancilla_restoration": ancilla_restoration_fidelity(state),
        }
        if evolver is not None:
            target = evolver.evolve(k * tau, phys0)
            row["fidelity_exact"] = float(abs(np.vdot(
                target, project_ancillas(state.amplitudes, layout))))
        for v in layout.geometry.vertices:
            row[f"gauss_re_{v[0]}_{v[1]}"] = float(gauss[v].real)
        for p, dist in flux.items():
            for m, pr in enumerate(dist):
                row[f"flux_{p[0]}_{p[1]}_m{m}"] = float(pr)
        rows.append(row)

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        header = list(rows[0].keys())
        write_csv(os.path.join(out_dir, "trajectory.csv"), header,
                  [[r[h] for h in header] for r in rows])
        if shots > 0:
            sample = measure_configuration(state, config.seed, shots)
            head = ([f"occ_{v[0]}_{v[1]}" for v in sample["vertices"]]
                    + [f"link_{l[0][0]}_{l[0][1]}_{l[1]}" for l in sample["links"]])
            body = np.hstack([sample["occupation"], sample["flux"]])
            write_csv(os.path.join(out_dir, "measurements.csv"), head,
                      body.tolist())
        write_manifest(out_dir, config, {"driver": "quench", "shots": shots})
    return rows


# ---------------------------------------------------------------------------
# verification battery


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    residual: float
    threshold: float

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.name}: residual {self.residual:.3e} (tol {self.threshold:.1e})"


def _check(name: str, residual: float, threshold: float) -> CheckResult:
    return CheckResult(name, bool(residual < threshold), float(residual),
                       float(threshold))


def _best_phase(a: np.ndarray, b: np.ndarray) -> complex:
    tr = np.trace(a.conj().T @ b)
    return tr / abs(tr) if abs(tr) > 0 else 1.0


def run_verification_suite(config: SimulationConfig,
                           out_dir: str | None = None) -> tuple[bool, list[CheckResult]]:
    """Invariant battery across all modules; dense parts use 2x2.

    Couplings, order, mode, and angles come from the config; the
    lattice for operator-norm work is pinned to 2x2 so the dense maps
    stay tractable.
    """
    checks: list[CheckResult] = []
    rng = np.random.default_rng(config.seed)
    cpl = config.couplings()

    # clock algebra closure over small N, plus the configured one
    worst = 0.0
    for n in sorted({2, 3, 4, 5, config.N}):
        alg = make_link_algebra(n)
        worst = max(worst, float(np.abs(
            alg.dft.conj().T @ alg.p @ alg.dft - alg.q).max()))
        worst = max(worst, float(np.abs(
            alg.dft.conj().T @ alg.log_p @ alg.dft - alg.log_q).max()))
    checks.append(_check("algebra_closure", worst, 1e-12))

    # stator eigenoperator relation at the configured N
    alg = make_link_algebra(config.N)
    u_i = stator_entangler(alg, "forward")
    intro = np.ones(config.N) / np.sqrt(config.N)
    s_q = u_i @ np.kron(np.eye(config.N), intro[:, None])
    lhs = np.kron(np.eye(config.N), alg.q) @ s_q
    rhs = s_q @ alg.q.conj().T
    checks.append(_check("stator_eigenoperator", float(np.abs(lhs - rhs).max()), 1e-12))

    # dense work on 2x2
    geom = LatticeGeometry(2, 2)
    lay = build_layout(geom, 3)
    tau = config.T / config.n_steps

    # plaquette sandwich: compiled even-plaquette window vs closed form
    sched = compile_step(lay, cpl, tau, "choreography", 1,
                         theta=config.theta, theta_prime=config.theta_prime)
    u_cho = schedule_physical_map(sched)
    u_dir = schedule_physical_map(compile_step(lay, cpl, tau, "direct", 1))
    field = spurious_phase_field(lay, config.theta, config.theta_prime)
    lam = solve_vertex_potential(lay, field)
    g = gauge_away_phases(lay, lam)
    nhat = np.zeros(1)
    for r in lay.registers:
        if r.kind == "ancilla":
            continue
        loc = np.array([0.0, 1.0]) if r.kind == "fermion" else np.zeros(r.dim)
        nhat = (nhat[:, None] + loc[None, :]).reshape(-1)
    central = np.exp(-1j * 2 * (config.theta + config.theta_prime) * nhat)
    gauged = central[:, None] * (g[:, None] * u_dir * np.conj(g)[None, :])
    checks.append(_check("gauging_equivalence",
                         float(np.abs(u_cho - gauged).max()), 1e-10))

    # gauge-matter conjugation at the gate level
    alg3 = make_link_algebra(3)
    uw = gate_matrix("uw", (), (3, 2))
    sp = np.kron(np.eye(3), np.array([[0, 0], [1, 0]], dtype=complex))
    lhs = uw @ sp @ uw.conj().T
    rhs = np.kron(alg3.q, np.eye(2)) @ sp
    checks.append(_check("gauge_matter_conjugation", float(np.abs(lhs - rhs).max()), 1e-12))

    # per-substep and whole-step gauge invariance on a random invariant state
    gi = random_gauge_invariant_physical(lay, rng)
    st = StateVector(lay, lift_physical(gi, lay))
    worst_g = 0.0
    worst_anc = 0.0
    for _, a, b in sched.substeps:
        st = StateVector(lay, execute_array(sched, st.amplitudes, (a, b)))
        worst_g = max(worst_g, max(abs(v - 1.0) for v in gauss_expectations(st).values()))
        worst_anc = max(worst_anc, 1.0 - ancilla_restoration_fidelity(st))
    checks.append(_check("per_substep_gauge_invariance", worst_g, 1e-10))
    checks.append(_check("ancilla_restoration", worst_anc, 1e-10))

    # collision calibration on random scattering lengths
    worst_c = 0.0
    u_want = z3_collision_entangler()
    for _ in range(10):
        a0, a1, a2 = rng.uniform(0.2, 2.0, size=3)
        g0, g1, g2 = scattering_lengths_to_couplings(a0, a1, a2)
        try:
            alpha, beta, _ = collision_calibration(g0, g1, g2)
        except ValueError:
            continue
        u_net = n0_pair_phase(beta) @ selective_collision(
            *eta_couplings(g0, g1, g2), alpha)
        phase = _best_phase(u_want, u_net)
        worst_c = max(worst_c, float(np.abs(u_net - phase * u_want).max()))
    checks.append(_check("collision_calibration", worst_c, 1e-11))

    # trotter slopes and bound dominance (uses config's couplings)
    evolver = ExactEvolver(total_hamiltonian(lay, cpl))
    target = evolver.propagator(config.T)
    lam_max = max(cpl.lambda_e, cpl.lambda_b, cpl.lambda_gm, cpl.mass)
    slope_rows = []
    dominance = True
    for order in (1, 2):
        errs = []
        for m in SCAN_STEPS:
            s = compile_step(lay, cpl, config.T / m, "direct", order)
            u_m = np.linalg.matrix_power(schedule_physical_map(s), m)
            dist = diamond_surrogate_distance(u_m, target, lay.physical_dim)
            bnd = trotter_bound(order, 2, lam_max, config.T, m)
            dominance = dominance and dist <= bnd
            errs.append(dist)
        slope = float(np.polyfit(np.log(SCAN_STEPS), np.log(errs), 1)[0])
        slope_rows.append((order, slope, errs))
        checks.append(_check(f"trotter_slope_order{order}",
                             abs(slope + order), 0.1))
    checks.append(_check("bound_dominance", 0.0 if dominance else 1.0, 0.5))

    # optical orthogonality across the validity region
    worst_o = 0.0
    for xi in XI_GRID:
        e1, e2, e3, valid = polarization_vectors(xi)
        if not valid:
            continue
        worst_o = max(worst_o, abs(float(np.dot(e1, e2))),
                      abs(float(np.dot(e1, e3))), abs(float(np.dot(e2, e3))))
    checks.append(_check("optical_orthogonality", worst_o, 1e-8))

    all_pass = all(c.passed for c in checks)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "verification.txt"), "w", encoding="utf-8") as f:
            for c in checks:
                f.write(c.line() + "\n")
            f.write(f"overall: {'PASS' if all_pass else 'FAIL'}\n")
        write_csv(os.path.join(out_dir, "trotter_slopes.csv"),
                  ["order", "slope"] + [f"err_M{m}" for m in SCAN_STEPS],
                  [[o, s] + list(e) for o, s, e in slope_rows])
        write_manifest(out_dir, config, {"driver": "verify"})
    return all_pass, checks


def run_trotter_scan(config: SimulationConfig, out_dir: str | None = None) -> list[dict]:
    """Error-vs-step-count sweep on 2x2 against the exact propagator."""
    lay = build_layout(LatticeGeometry(2, 2), 3)
    cpl = config.couplings()
    evolver = ExactEvolver(total_hamiltonian(lay, cpl))
    target = evolver.propagator(config.T)
    lam_max = max(cpl.lambda_e, cpl.lambda_b, cpl.lambda_gm, cpl.mass)
    norm_sum = exact_norm_sum(lay, cpl)
    rows = []
    for m in SCAN_STEPS:
        sched = compile_step(lay, cpl, config.T / m, config.mode, config.order,
                             theta=config.theta, theta_prime=config.theta_prime)
        u_m = np.linalg.matrix_power(schedule_physical_map(sched), m)
        dist = diamond_surrogate_distance(u_m, target, lay.physical_dim)
        rows.append({
            "n_steps": m,
            "tau": config.T / m,
            "distance": dist,
            "bound": trotter_bound(config.order, 2, lam_max, config.T, m),
            "bound_valid": int(bound_validity(config.T, m, norm_sum)),
            "gate_count": sched.gate_count(),
        })
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        header = list(rows[0].keys())
        write_csv(os.path.join(out_dir, "trotter_scan.csv"), header,
                  [[r[h] for h in header] for r in rows])
        write_manifest(out_dir, config, {"driver": "trotter-scan"})
    return rows


def run_optical_scan(config: SimulationConfig, out_dir: str | None = None) -> list[dict]:
    """Polarization validity sweep plus minima and shaping series."""
    rows = []
    for xi in XI_GRID:
        e1, e2, e3, valid = polarization_vectors(xi)
        k1, k2, k3 = wave_vectors(xi)
        cross = max(abs(float(np.dot(e1, e2))), abs(float(np.dot(e1, e3))),
                    abs(float(np.dot(e2, e3))))
        trans = max(abs(float(np.dot(e1, k1))), abs(float(np.dot(e2, k2))),
                    abs(float(np.dot(e3, k3))))
        rows.append({"xi": xi, "valid": int(valid), "max_cross_dot": cross,
                     "max_transversal_dot": trans})
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        header = list(rows[0].keys())
        write_csv(os.path.join(out_dir, "polarization_scan.csv"), header,
                  [[r[h] for h in header] for r in rows])
        minima = v_mat_minima(0, 0, 0, 0, (-0.4, config.Lx - 0.6, -0.4, config.Ly - 0.6))
        write_csv(os.path.join(out_dir, "standard_minima.csv"), ["x", "y"],
                  [[x, y] for x, y in minima])
        for step in ("eh", "oh", "ev", "ov"):
            series = shaping_schedule(step, 2.0, 1.0)
            write_csv(os.path.join(out_dir, f"shaping_{step}.csv"),
                      ["t", "f", "g", "h", "phi"], series.tolist())
        write_manifest(out_dir, config, {"driver": "optical"})
    return rows


def run_compile(config: SimulationConfig, out_dir: str | None = None) -> str:
    """Compile one step and return (optionally write) its text dump."""
    layout = config.build_geometry()
    sched = compile_step(layout, config.couplings(), config.T / config.n_steps,
                         config.mode, config.order,
                         theta=config.theta, theta_prime=config.theta_prime)
    text = dump_schedule(sched)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "schedule.txt"), "w", encoding="utf-8") as f:
            f.write(text)
        write_manifest(out_dir, config, {
            "driver": "compile",
            "gate_count": sched.gate_count(),
            "gate_count_with_idles": sched.gate_count(include_idle=True),
        })
    return text
