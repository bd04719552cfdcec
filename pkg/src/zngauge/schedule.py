"""Trotter-step compilation into gate schedules, execution, phase gauging.

Choreography mode reproduces the 35-stage collision program: every even
plaquette runs a suite of blocks on its own ancilla (vertical link,
horizontal link with the stator kept, plaquette sandwich keeping the
next vertical stator, then the odd-origin links), and links no suite
reaches get self-contained blocks inside their class window.  Direct
mode swaps the collision machinery for two-register conjugation gates
and keeps ancillas only for the plaquette sandwiches.

Stage labels follow the choreography figure; transport stages carry
explicit idle markers so every label from 1 to 35 appears.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .lattice import (
    Link,
    RegisterLayout,
    StateVector,
    Vertex,
    _apply_gate_array,
    build_global_singlet,
    is_even,
    lift_physical,
    project_ancillas,
)
from .algebra import Couplings, gauss_expectations
from .stators import COLLISION_ANGLE, GateOp, gate_matrix

GRADIENT_TOL = 1e-12

# stage windows of the four link-class blocks in choreography mode
EV_WINDOW = (2, 6)
EH_WINDOW = (7, 10)
OV_WINDOW = (19, 23)
OH_WINDOW = (24, 27)

# gauge-invariant cut points: each window composes blocks that share
# kept stators, so it is the finest partition restoring the ancillas
CHOREOGRAPHY_SUBSTEPS = (
    ("gm_ev", 1, 6),
    ("gm_eh_plaq_even_gm_ov", 7, 23),
    ("gm_oh_plaq_odd", 24, 34),
    ("mass_electric", 35, 35),
)

DIRECT_SUBSTEPS = (
    ("gm_ev", 1, 1),
    ("gm_eh", 2, 2),
    ("plaq_even", 3, 3),
    ("gm_ov", 4, 4),
    ("gm_oh", 5, 5),
    ("plaq_odd", 6, 6),
    ("mass", 7, 7),
    ("electric", 8, 8),
)


@dataclass(frozen=True)
class Schedule:
    """Ordered gate program for one Trotter step.

    substeps are half-open op-index ranges (label, start, stop) whose
    maps individually restore the ancillas and commute with the Gauss
    law; theta/theta_prime record the free phase angles compiled in.
    """

    layout: RegisterLayout
    ops: tuple[GateOp, ...]
    mode: str
    order: int
    tau: float
    theta: float
    theta_prime: float
    substeps: tuple[tuple[str, int, int], ...]

    def gate_count(self, include_idle: bool = False) -> int:
        return sum(1 for op in self.ops if include_idle or op.name != "idle")

    def stage_labels(self) -> list[int]:
        return [op.stage for op in self.ops]


# ---------------------------------------------------------------------------
# choreography emission helpers


def _ui_ops(layout: RegisterLayout, link: Link, anc: int, stage: int,
            dagger: bool = False) -> list[GateOp]:
    """Q-type entangler as its collision realization (dft, U'!, dft!)."""
    lr = layout.link_index(link)
    mid = "collision_zz" if dagger else "collision_zz_dag"
    return [
        GateOp("dft_link", (lr,), (), stage),
        GateOp(mid, (lr, anc), (COLLISION_ANGLE,), stage),
        GateOp("dft_link_dag", (lr,), (), stage),
    ]


def _gm_block(layout: RegisterLayout, link: Link, anc: int, coeff: float,
              theta: float, theta_prime: float,
              s_create: int, s_fa: int, s_tun: int, s_flip: int, s_undo: int,
              create: str = "full", undo: str = "full") -> dict[int, list[GateOp]]:
    """One gauge-matter block: P-stator, phased tunneling, teardown.

    create "convert" reuses a Q-stator already sitting on the link
    (emits only the ancilla basis change); undo "keep" leaves it there.
    """
    geom = layout.geometry
    origin = link[0]
    head = geom.link_head(link)
    f_o = layout.fermion_index(origin)
    f_h = layout.fermion_index(head)
    out: dict[int, list[GateOp]] = {s: [] for s in (s_create, s_fa, s_tun, s_flip, s_undo)}

    if create == "full":
        out[s_create] += _ui_ops(layout, link, anc, s_create)
    out[s_create].append(GateOp("dft_anc", (anc,), (), s_create))

    out[s_fa].append(GateOp("fermion_anc_phase", (f_o, anc), (), s_fa))
    out[s_fa].append(GateOp("occupation_phase", (f_o,), (theta,), s_fa))

    out[s_tun].append(GateOp("tunnel", tuple(range(f_o, f_h + 1)), (coeff,), s_tun))

    out[s_flip] += [
        GateOp("flip_anc", (anc,), (), s_flip),
        GateOp("fermion_anc_phase", (f_o, anc), (), s_flip),
        GateOp("flip_anc", (anc,), (), s_flip),
        GateOp("occupation_phase", (f_o,), (theta_prime,), s_flip),
    ]

    out[s_undo].append(GateOp("dft_anc_dag", (anc,), (), s_undo))
    if undo == "full":
        out[s_undo] += _ui_ops(layout, link, anc, s_undo, dagger=True)
    return out


def _even_plaquette_ops(layout: RegisterLayout, p: Vertex, anc: int,
                        drive_coeff: float, keep_u2: bool) -> dict[int, list[GateOp]]:
    """Stages 11-17: assemble around the kept horizontal stator, drive, teardown."""
    (l1, _), (l2, _), (l3, _), (l4, _) = layout.geometry.plaquette_links(p)
    out: dict[int, list[GateOp]] = {s: [] for s in range(11, 18)}
    out[11] += _ui_ops(layout, l2, anc, 11)                  # U2
    out[12] += _ui_ops(layout, l3, anc, 12, dagger=True)     # U3!
    out[13] += _ui_ops(layout, l4, anc, 13, dagger=True)     # U4!
    out[14].append(GateOp("anc_drive", (anc,), (drive_coeff,), 14))
    out[15] += _ui_ops(layout, l1, anc, 15, dagger=True)     # undo kept U1
    out[16] += _ui_ops(layout, l3, anc, 16)
    out[17] += _ui_ops(layout, l4, anc, 17)
    if not keep_u2:
        out[17] += _ui_ops(layout, l2, anc, 17, dagger=True)
    return out


def _odd_plaquette_ops(layout: RegisterLayout, q: Vertex, anc: int,
                       drive_coeff: float, u1_kept: bool) -> dict[int, list[GateOp]]:
    """Stages 28-34: the odd-parity plaquette sandwich."""
    (l1, _), (l2, _), (l3, _), (l4, _) = layout.geometry.plaquette_links(q)
    out: dict[int, list[GateOp]] = {s: [] for s in range(28, 35)}
    if not u1_kept:
        out[28] += _ui_ops(layout, l1, anc, 28)
    out[29] += _ui_ops(layout, l2, anc, 29)
    out[30] += _ui_ops(layout, l3, anc, 30, dagger=True)
    out[30] += _ui_ops(layout, l4, anc, 30, dagger=True)
    out[31].append(GateOp("anc_drive", (anc,), (drive_coeff,), 31))
    out[32] += _ui_ops(layout, l4, anc, 32)
    out[32] += _ui_ops(layout, l3, anc, 32)
    out[33] += _ui_ops(layout, l2, anc, 33, dagger=True)
    out[34] += _ui_ops(layout, l1, anc, 34, dagger=True)
    return out


_ORPHAN_STAGES = {
    "ev": (2, 3, 4, 5, 6),
    "eh": (7, 8, 9, 10, 10),
    "ov": (19, 20, 21, 22, 23),
    "oh": (24, 25, 26, 27, 27),
}

_SWEEP_STAGE = {"ev": 5, "eh": 10, "ov": 22, "oh": 27}
_CLASS_WINDOW = {"ev": EV_WINDOW, "eh": EH_WINDOW, "ov": OV_WINDOW, "oh": OH_WINDOW}


def _merge(into: dict[int, list[GateOp]], part: dict[int, list[GateOp]]):
    for s, ops in part.items():
        into.setdefault(s, []).extend(ops)


def _choreography_ops(layout: RegisterLayout, cpl: Couplings, h: float,
                      theta: float, theta_prime: float,
                      electric_time: float | None) -> list[GateOp]:
    geom = layout.geometry
    if layout.N != 3:
        raise ValueError("choreography mode realizes entanglers by spin-1 collisions; N must be 3")
    anc_regs = layout.ancilla_indices()
    if not anc_regs:
        raise ValueError("choreography mode needs at least one ancilla register")

    stage_ops: dict[int, list[GateOp]] = {s: [] for s in range(1, 36)}
    # busy[window] = ancillas serving suite blocks there; orphan blocks avoid them
    busy: dict[tuple[int, int], set[int]] = {w: set() for w in _CLASS_WINDOW.values()}
    covered: set[Link] = set()
    plaq_set = set(geom.plaquettes)
    handled_odd: set[Vertex] = set()

    gm_coeff = h * cpl.lambda_gm
    b_coeff = h * cpl.lambda_b

    for p in geom.plaquettes:
        if not is_even(p):
            continue
        anc = layout.ancilla_of_plaquette[p]
        l_ev = (p, 2)
        l_eh = (p, 1)
        q = (p[0] + 1, p[1])
        l_ov = (q, 2)
        l_oh = (q, 1)

        _merge(stage_ops, _gm_block(layout, l_ev, anc, gm_coeff, theta, theta_prime,
                                    2, 3, 4, 5, 6))
        covered.add(l_ev)
        busy[EV_WINDOW].add(anc)

        _merge(stage_ops, _gm_block(layout, l_eh, anc, gm_coeff, theta, theta_prime,
                                    7, 8, 9, 10, 10, undo="keep"))
        covered.add(l_eh)
        busy[EH_WINDOW].add(anc)

        keep_oh = q in plaq_set and layout.ancilla_of_plaquette.get(q) == anc
        _merge(stage_ops, _even_plaquette_ops(layout, p, anc, b_coeff, keep_u2=True))

        _merge(stage_ops, _gm_block(layout, l_ov, anc, gm_coeff, theta, theta_prime,
                                    19, 20, 21, 22, 23, create="convert"))
        covered.add(l_ov)
        busy[OV_WINDOW].add(anc)

        if geom.link_exists(l_oh):
            undo = "keep" if keep_oh else "full"
            _merge(stage_ops, _gm_block(layout, l_oh, anc, gm_coeff, theta, theta_prime,
                                        24, 25, 26, 27, 27, undo=undo))
            covered.add(l_oh)
            busy[OH_WINDOW].add(anc)

        if keep_oh:
            _merge(stage_ops, _odd_plaquette_ops(layout, q, anc, b_coeff, u1_kept=True))
            handled_odd.add(q)

    for q in geom.plaquettes:
        if is_even(q) or q in handled_odd:
            continue
        anc = layout.ancilla_of_plaquette[q]
        _merge(stage_ops, _odd_plaquette_ops(layout, q, anc, b_coeff, u1_kept=False))

    # self-contained blocks for links no suite reached, one distinct free
    # ancilla each; overflow beyond the free pool runs as sequential whole
    # blocks at a point where every ancilla is provably restored (after
    # stage 6 for the even classes, after stage 23 for the odd ones).
    # Same-class blocks commute, so either placement is exact.
    overflow_slot = {"ev": 6, "eh": 6, "ov": 23, "oh": 23}
    window_tail: dict[int, list[GateOp]] = {}
    for cls in ("ev", "eh", "ov", "oh"):
        links = [l for l in geom.links if geom.link_class(l) == cls and l not in covered]
        if not links:
            continue
        free = [a for a in anc_regs if a not in busy[_CLASS_WINDOW[cls]]]
        stages = _ORPHAN_STAGES[cls]
        for i, link in enumerate(links):
            if i < len(free):
                _merge(stage_ops, _gm_block(layout, link, free[i], gm_coeff,
                                            theta, theta_prime, *stages))
            else:
                anc = anc_regs[i % len(anc_regs)]
                block = _gm_block(layout, link, anc, gm_coeff, theta, theta_prime, *stages)
                flat = [op for s in sorted(block) for op in block[s]]
                window_tail.setdefault(overflow_slot[cls], []).extend(flat)

    # phase sweeps completing each parity class (sites that are not the
    # origin of any link of the class still need both angles once)
    for cls in ("ev", "eh", "ov", "oh"):
        parity_even = cls in ("ev", "eh")
        origins = {l[0] for l in geom.links if geom.link_class(l) == cls}
        stage = _SWEEP_STAGE[cls]
        for v in geom.vertices:
            if is_even(v) != parity_even or v in origins:
                continue
            f = layout.fermion_index(v)
            stage_ops[stage].append(GateOp("occupation_phase", (f,), (theta,), stage))
            stage_ops[stage].append(GateOp("occupation_phase", (f,), (theta_prime,), stage))

    # mass then electric close the step
    for v in geom.vertices:
        sign = 1.0 if is_even(v) else -1.0
        stage_ops[35].append(GateOp("mass_phase", (layout.fermion_index(v),),
                                    (h * cpl.mass * sign,), 35))
    if electric_time is not None:
        e_name = "electric_group" if cpl.h_e_variant == "group" else "electric_z3"
        for l in geom.links:
            stage_ops[35].append(GateOp(e_name, (layout.link_index(l),),
                                        (electric_time * cpl.lambda_e,), 35))

    ops: list[GateOp] = []
    for s in range(1, 36):
        if stage_ops[s]:
            ops.extend(stage_ops[s])
        else:
            ops.append(GateOp("idle", (), (), s))
        ops.extend(window_tail.get(s, ()))
    return ops


def _direct_ops(layout: RegisterLayout, cpl: Couplings, h: float,
                electric_time: float | None) -> list[GateOp]:
    geom = layout.geometry
    stage_ops: dict[int, list[GateOp]] = {s: [] for s in range(1, 9)}
    gm_coeff = h * cpl.lambda_gm
    b_coeff = h * cpl.lambda_b

    class_stage = {"ev": 1, "eh": 2, "ov": 4, "oh": 5}
    for l in geom.links:
        s = class_stage[geom.link_class(l)]
        f_o = layout.fermion_index(l[0])
        f_h = layout.fermion_index(geom.link_head(l))
        lr = layout.link_index(l)
        stage_ops[s] += [
            GateOp("uw_dag", (lr, f_o), (), s),
            GateOp("tunnel", tuple(range(f_o, f_h + 1)), (gm_coeff,), s),
            GateOp("uw", (lr, f_o), (), s),
        ]

    for p in geom.plaquettes:
        s = 3 if is_even(p) else 6
        anc = layout.ancilla_of_plaquette.get(p)
        if anc is None:
            raise ValueError(f"plaquette {p} lacks an ancilla for its sandwich")
        fwd = []
        for link, orient in geom.plaquette_links(p):
            name = "q_entangler" if orient > 0 else "q_entangler_dag"
            fwd.append(GateOp(name, (layout.link_index(link), anc), (), s))
        stage_ops[s] += fwd
        stage_ops[s].append(GateOp("anc_drive", (anc,), (b_coeff,), s))
        stage_ops[s] += [op.dagger() for op in reversed(fwd)]

    for v in geom.vertices:
        sign = 1.0 if is_even(v) else -1.0
        stage_ops[7].append(GateOp("mass_phase", (layout.fermion_index(v),),
                                   (h * cpl.mass * sign,), 7))
    if electric_time is not None:
        e_name = "electric_group" if cpl.h_e_variant == "group" else "electric_z3"
        for l in geom.links:
            stage_ops[8].append(GateOp(e_name, (layout.link_index(l),),
                                       (electric_time * cpl.lambda_e,), 8))

    ops: list[GateOp] = []
    for s in range(1, 9):
        ops.extend(stage_ops[s] or [GateOp("idle", (), (), s)])
    return ops


def _substep_ranges(ops: list[GateOp], windows) -> tuple[tuple[str, int, int], ...]:
    out = []
    for label, lo, hi in windows:
        idx = [i for i, op in enumerate(ops) if lo <= op.stage <= hi]
        if idx:
            assert len(idx) == idx[-1] + 1 - idx[0], f"window {label} not contiguous"
            out.append((label, idx[0], idx[-1] + 1))
    return tuple(out)


def compile_step(layout: RegisterLayout, couplings: Couplings, tau: float,
                 mode: str = "choreography", order: int = 1, *,
                 theta: float = 0.0, theta_prime: float = 0.0) -> Schedule:
    """Compile one Trotter step of duration tau into a Schedule.

    Order 1 applies the eight Hamiltonian pieces once each; order 2 is
    the palindromic doubling at tau/2 with the electric close-out merged
    into a single full-tau application at the center.  The mirror half
    is emitted as the reversed adjoint of a step compiled at -tau/2
    (same theta angles), which reproduces each piece at +tau/2 while
    unwinding every kept stator exactly.  With nonzero angles both
    halves then carry the same spurious field, so the order-2 map is
    the plain conjugation of the unphased one by gauge_away_phases with
    no leftover central factor.
    """
    if mode not in ("choreography", "direct"):
        raise ValueError(f"mode must be choreography|direct, got {mode!r}")
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")

    def emit(h, th, thp, e_time):
        if mode == "choreography":
            return _choreography_ops(layout, couplings, h, th, thp, e_time)
        return _direct_ops(layout, couplings, h, e_time)

    windows = CHOREOGRAPHY_SUBSTEPS if mode == "choreography" else DIRECT_SUBSTEPS
    if order == 1:
        ops = emit(tau, theta, theta_prime, tau)
        substeps = _substep_ranges(ops, windows)
    else:
        h = tau / 2
        fwd = emit(h, theta, theta_prime, tau)
        mirror_src = emit(-h, theta, theta_prime, None)
        mirror = [op.dagger() for op in reversed(mirror_src)]
        ops = fwd + mirror
        fwd_sub = _substep_ranges(fwd, windows)
        n_fwd, n_mir = len(fwd), len(mirror_src)
        mir_sub = []
        for label, a, b in reversed(_substep_ranges(mirror_src, windows)):
            mir_sub.append(("mirror_" + label, n_fwd + n_mir - b, n_fwd + n_mir - a))
        substeps = fwd_sub + tuple(mir_sub)

    return Schedule(layout, tuple(ops), mode, order, float(tau),
                    float(theta), float(theta_prime), substeps)


# ---------------------------------------------------------------------------
# execution


@lru_cache(maxsize=4096)
def _cached_gate(name: str, params: tuple[float, ...], dims: tuple[int, ...]) -> np.ndarray:
    m = gate_matrix(name, params, dims)
    m.setflags(write=False)
    return m


def execute(schedule: Schedule, state: StateVector) -> StateVector:
    """Apply every gate in order; idle markers are skipped."""
    if state.layout is not schedule.layout and state.layout != schedule.layout:
        raise ValueError("state layout does not match schedule layout")
    amp = execute_array(schedule, state.amplitudes)
    return StateVector(state.layout, amp)


def execute_array(schedule: Schedule, amplitudes: np.ndarray,
                  op_range: tuple[int, int] | None = None) -> np.ndarray:
    """Raw-array executor; trailing axes beyond the register dims are batch."""
    layout = schedule.layout
    dims = tuple(int(d) for d in layout.dims)
    work = amplitudes
    lo, hi = op_range if op_range is not None else (0, len(schedule.ops))
    for op in schedule.ops[lo:hi]:
        if op.name == "idle":
            continue
        tdims = tuple(dims[t] for t in op.targets)
        work = _apply_gate_array(work, layout, _cached_gate(op.name, op.params, tdims),
                                 list(op.targets))
    return work


def schedule_physical_map(schedule: Schedule,
                          op_range: tuple[int, int] | None = None) -> np.ndarray:
    """Dense physical-space matrix of (a slice of) the schedule.

    Ancillas enter in |in> and are projected back onto |in> at the end,
    which is exact whenever the slice restores them (every substep does).
    """
    layout = schedule.layout
    d_phys = layout.physical_dim
    basis = lift_physical(np.eye(d_phys, dtype=np.complex128), layout)
    out = execute_array(schedule, basis, op_range)
    return project_ancillas(out, layout).reshape(d_phys, d_phys)


@dataclass
class TrotterResult:
    final_state: StateVector
    schedule: Schedule
    observables: list[dict]


def total_fermion_number(state: StateVector) -> float:
    """Expectation of the summed fermion occupation."""
    layout = state.layout
    probs = np.abs(state.amplitudes.reshape(tuple(layout.dims))) ** 2
    total = 0.0
    for i, r in enumerate(layout.registers):
        if r.kind != "fermion":
            continue
        axes = tuple(j for j in range(len(layout.registers)) if j != i)
        total += float(probs.sum(axis=axes)[1])
    return total


def trotter_evolve(layout: RegisterLayout, couplings: Couplings, T: float,
                   n_steps: int, order: int = 1, mode: str = "choreography", *,
                   initial_state: StateVector | None = None,
                   theta: float = 0.0, theta_prime: float = 0.0,
                   record: bool = True) -> TrotterResult:
    """Repeat the compiled step n_steps times, recording checks per step."""
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    sched = compile_step(layout, couplings, T / n_steps, mode, order,
                         theta=theta, theta_prime=theta_prime)
    state = initial_state if initial_state is not None else build_global_singlet(layout)
    rows: list[dict] = []
    for k in range(n_steps):
        state = execute(sched, state)
        if record:
            gauss = gauss_expectations(state)
            rows.append({
                "step": k + 1,
                "time": (k + 1) * T / n_steps,
                "gauss_max_deviation": max(abs(v - 1.0) for v in gauss.values()),
                "fermion_number": total_fermion_number(state),
            })
    return TrotterResult(state, sched, rows)


# ---------------------------------------------------------------------------
# spurious-phase bookkeeping


def spurious_phase_field(layout: RegisterLayout, theta: float,
                         theta_prime: float) -> dict[Link, float]:
    """Per-link U(1) phases accumulated by the phased choreography.

    Values follow from commuting every occupation phase through the
    tunneling couplings of one full step (the full-parity sweeps make
    the pattern uniform on open boundaries):

        even horizontal  2 theta + theta'
        even vertical    theta
        odd horizontal   -theta'
        odd vertical     -(theta + 2 theta')

    The product also carries the central factor
    exp(-i 2 (theta + theta') N_total), a global phase at fixed fermion
    number.
    """
    table = {
        "eh": 2 * theta + theta_prime,
        "ev": theta,
        "oh": -theta_prime,
        "ov": -(theta + 2 * theta_prime),
    }
    geom = layout.geometry
    return {l: table[geom.link_class(l)] for l in geom.links}


def plaquette_curl(layout: RegisterLayout, field: dict[Link, float], p: Vertex) -> float:
    """Oriented phase sum around one plaquette."""
    total = 0.0
    for link, orient in layout.geometry.plaquette_links(p):
        total += orient * field[link]
    return total


def solve_vertex_potential(layout: RegisterLayout,
                           field: dict[Link, float]) -> dict[Vertex, float]:
    """Vertex potential with field(x,k) = Lambda(x+k) - Lambda(x), rooted at 0.

    Solved over a spanning tree, then every link is checked; a
    non-gradient field (nonzero curl somewhere) raises.
    """
    geom = layout.geometry
    lam: dict[Vertex, float] = {(0, 0): 0.0}
    frontier = [(0, 0)]
    while frontier:
        v = frontier.pop()
        x1, x2 = v
        for k, nb in ((1, (x1 + 1, x2)), (2, (x1, x2 + 1)), (1, (x1 - 1, x2)), (2, (x1, x2 - 1))):
            if nb in lam:
                continue
            if nb == (x1 + 1, x2) or nb == (x1, x2 + 1):
                link = (v, k)
                if geom.link_exists(link):
                    lam[nb] = lam[v] + field[link]
                    frontier.append(nb)
            else:
                link = (nb, k)
                if geom.link_exists(link):
                    lam[nb] = lam[v] - field[link]
                    frontier.append(nb)
    for link in geom.links:
        head = geom.link_head(link)
        resid = abs(lam[head] - lam[link[0]] - field[link])
        if resid > GRADIENT_TOL:
            raise ValueError(f"field is not a gradient: residual {resid:.3e} on link {link}")
    return lam


def gauge_away_phases(layout: RegisterLayout, Lambda: dict[Vertex, float]) -> np.ndarray:
    """Diagonal unitary G = exp(-i sum_x Lambda(x) n_x) on the physical space.

    Returned as the diagonal (length physical_dim); conjugating the
    unphased step by G, together with a global phase on fixed-number
    states, reproduces the phased one.
    """
    geom = layout.geometry
    missing = [v for v in geom.vertices if v not in Lambda]
    if missing:
        raise ValueError(f"Lambda missing vertices {missing}")
    diag = np.ones(1, dtype=np.complex128)
    for r in layout.registers:
        if r.kind == "ancilla":
            continue
        if r.kind == "fermion":
            local = np.array([1.0, np.exp(-1j * Lambda[r.site])])
        else:
            local = np.ones(r.dim)
        diag = np.kron(diag, local)
    return diag


# ---------------------------------------------------------------------------
# serialization


def dump_schedule(schedule: Schedule) -> str:
    """One gate per line: stage, name, comma-joined targets, parameters."""
    lines = []
    for op in schedule.ops:
        targets = ",".join(str(t) for t in op.targets)
        params = ",".join("%.17g" % p for p in op.params)
        lines.append(f"{op.stage}\t{op.name}\t{targets}\t{params}")
    return "\n".join(lines) + "\n"


def parse_schedule(text: str, layout: RegisterLayout, mode: str, order: int,
                   tau: float, theta: float = 0.0, theta_prime: float = 0.0) -> Schedule:
    """Inverse of dump_schedule (substep metadata is not serialized)."""
    ops = []
    for line in text.splitlines():
        if not line.strip():
            continue
        stage_s, name, targets_s, params_s = line.split("\t")
        targets = tuple(int(t) for t in targets_s.split(",")) if targets_s else ()
        params = tuple(float(p) for p in params_s.split(",")) if params_s else ()
        ops.append(GateOp(name, targets, params, int(stage_s)))
    return Schedule(layout, tuple(ops), mode, order, tau, theta, theta_prime, ())
