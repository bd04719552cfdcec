"""Z_N clock-shift algebra, fermionic operators, Gauss law, Hamiltonians.

Single-link conventions (all N x N):

    P |m> = omega^m |m>,   Q |m> = |m+1 mod N>,   omega = exp(2 pi i / N)
    dft[j,k] = omega^(j k) / sqrt(N),   dft! P dft = Q

Operators on the composite space are handled as "factor maps": a dict
register-index -> small matrix, implicitly identity elsewhere.  Products
of factor maps multiply register by register, which is exact because the
underlying operators are tensor products.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import (
    Link,
    RegisterLayout,
    StateVector,
    Vertex,
    apply_gate,
    is_even,
)

HERMITICITY_TOL = 1e-10

TERM_NAMES = ("E", "M", "Be", "Bo", "GM_eh", "GM_ev", "GM_oh", "GM_ov")

# single fermionic mode, |0> = (1, 0) empty
SIGMA_PLUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=np.complex128)   # create
SIGMA_MINUS = SIGMA_PLUS.T.conj().copy()                               # annihilate
NUMBER_OP = np.diag([0.0, 1.0]).astype(np.complex128)
PARITY_Z = np.diag([1.0, -1.0]).astype(np.complex128)                  # 1 - 2n


def symmetric_representatives(N: int) -> np.ndarray:
    """m_bar for m in 0..N-1: the balanced branch of the Z_N labels.

    Odd N: {0, 1, .., (N-1)/2, -(N-1)/2, .., -1}; even N keeps +N/2.
    """
    m = np.arange(N)
    half = N // 2 if N % 2 == 0 else (N - 1) // 2
    return np.where(m <= half, m, m - N).astype(np.float64)


@dataclass(frozen=True)
class LinkAlgebra:
    """Matrices generating and diagnosing a single Z_N link."""

    N: int
    p: np.ndarray
    q: np.ndarray
    dft: np.ndarray
    log_p: np.ndarray
    log_q: np.ndarray
    # spin-1 data, populated for N=3 only (None otherwise)
    f_z: np.ndarray | None = None
    f_x: np.ndarray | None = None
    f_y: np.ndarray | None = None
    # spin-1/2 partner used by the fermion-ancilla collision channel
    f_half: tuple[np.ndarray, np.ndarray, np.ndarray] | None = field(default=None, compare=False)


# internal label m -> row of the spin-1 basis ordered (+1, 0, -1)
_SPIN1_PERMUTATION = (1, 0, 2)


def _spin1_matrices() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Spin-1 (F_x, F_y, F_z) in the internal label order (0, +1, -1)."""
    fz_std = np.diag([1.0, 0.0, -1.0]).astype(np.complex128)
    fplus = np.sqrt(2.0) * np.array(
        [[0, 1, 0], [0, 0, 1], [0, 0, 0]], dtype=np.complex128
    )
    fx_std = (fplus + fplus.conj().T) / 2
    fy_std = (fplus - fplus.conj().T) / (2j)
    perm = np.array(_SPIN1_PERMUTATION)
    out = []
    for m in (fx_std, fy_std, fz_std):
        out.append(m[np.ix_(perm, perm)])
    return tuple(out)


def make_link_algebra(N: int) -> LinkAlgebra:
    """Clock/shift pair, basis change, and logarithm branch for Z_N."""
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    omega = np.exp(2j * np.pi / N)
    m = np.arange(N)
    p = np.diag(omega ** m)
    q = np.zeros((N, N), dtype=np.complex128)
    q[(m + 1) % N, m] = 1.0
    dft = omega ** np.outer(m, m) / np.sqrt(N)
    log_p = 1j * (2 * np.pi / N) * np.diag(symmetric_representatives(N)).astype(np.complex128)
    log_q = dft.conj().T @ log_p @ dft

    f_z = f_x = f_y = None
    f_half = None
    if N == 3:
        f_x, f_y, f_z = _spin1_matrices()
        sx = np.array([[0, 1], [1, 0]], dtype=np.complex128) / 2
        sy = np.array([[0, -1j], [1j, 0]], dtype=np.complex128) / 2
        sz = np.diag([1.0, -1.0]).astype(np.complex128) / 2
        f_half = (sx, sy, sz)
    return LinkAlgebra(N, p, q, dft, log_p, log_q, f_z, f_x, f_y, f_half)


def expm_from_hermitian(h: np.ndarray, scale: complex = -1j) -> np.ndarray:
    """exp(scale * h) for Hermitian h via eigendecomposition."""
    h = np.asarray(h, dtype=np.complex128)
    if np.abs(h - h.conj().T).max() > HERMITICITY_TOL:
        raise ValueError("generator is not Hermitian")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(scale * w)) @ v.conj().T


# ---------------------------------------------------------------------------
# factor maps


def fermion_op(layout: RegisterLayout, vertex: Vertex, kind: str) -> dict[int, np.ndarray]:
    """Creation/annihilation operator at a vertex as a factor map.

    The ordering string runs over all fermion registers with smaller
    row-major mode index, so anticommutation holds across the lattice.
    """
    if kind not in ("create", "annihilate"):
        raise ValueError(f"kind must be create|annihilate, got {kind!r}")
    mode = layout.fermion_mode(vertex)
    local = SIGMA_PLUS if kind == "create" else SIGMA_MINUS
    factors: dict[int, np.ndarray] = {}
    for i, r in enumerate(layout.registers):
        if r.kind != "fermion":
            continue
        other = layout.fermion_mode(r.site)
        if other < mode:
            factors[i] = PARITY_Z
        elif other == mode:
            factors[i] = local
    return factors


def multiply_factors(a: dict[int, np.ndarray], b: dict[int, np.ndarray]) -> dict[int, np.ndarray]:
    """Register-wise product a.b of two factor maps."""
    out = dict(a)
    for i, m in b.items():
        out[i] = out[i] @ m if i in out else m
    return out


def hopping_factors(layout: RegisterLayout, link: Link, with_link: bool = True) -> dict[int, np.ndarray]:
    """psi!(x) [Q(x,k)] psi(x+k) as a factor map (origin gets the creation)."""
    geom = layout.geometry
    if not geom.link_exists(link):
        raise KeyError(f"link {link} does not exist")
    x, _ = link
    y = geom.link_head(link)
    f = multiply_factors(fermion_op(layout, x, "create"), fermion_op(layout, y, "annihilate"))
    if with_link:
        alg = make_link_algebra(layout.N)
        f[layout.link_index(link)] = alg.q
    return f


def apply_factors(state: StateVector, factors: dict[int, np.ndarray]) -> StateVector:
    """Apply a factor map whose every factor is unitary."""
    for i, m in sorted(factors.items()):
        state = apply_gate(state, m, [i])
    return state


def apply_factors_physical(layout: RegisterLayout, amplitudes: np.ndarray,
                           factors: dict[int, np.ndarray]) -> np.ndarray:
    """Apply a factor map to physical-register amplitudes (no unitarity check)."""
    phys_dims = tuple(r.dim for r in layout.registers if r.kind != "ancilla")
    work = amplitudes.reshape(phys_dims)
    for i, m in factors.items():
        work = np.moveaxis(np.tensordot(m, work, axes=([1], [i])), 0, i)
    return work.reshape(-1)


def embed_physical(layout: RegisterLayout, factors: dict[int, np.ndarray]) -> np.ndarray:
    """Dense matrix of a factor map on the physical (non-ancilla) registers."""
    out = np.array([[1.0 + 0j]])
    for i, r in enumerate(layout.registers):
        if r.kind == "ancilla":
            continue
        out = np.kron(out, factors.get(i, np.eye(r.dim)))
    return out


# ---------------------------------------------------------------------------
# Gauss law


def gauss_law_operator(layout: RegisterLayout, vertex: Vertex) -> dict[int, np.ndarray]:
    """Local gauge rotation at a vertex, as a factor map of unitaries.

    Outgoing existing links contribute P, incoming ones P!, and the
    fermion register the staggered-charge phase
    exp(-i (2 pi / N) (n - s)) with s = 0 on even and 1 on odd vertices.
    """
    geom = layout.geometry
    if vertex not in set(geom.vertices):
        raise KeyError(f"vertex {vertex} outside lattice")
    alg = make_link_algebra(layout.N)
    x1, x2 = vertex
    factors: dict[int, np.ndarray] = {}
    for k, tail in ((1, (x1 - 1, x2)), (2, (x1, x2 - 1))):
        out_l = ((x1, x2), k)
        if geom.link_exists(out_l):
            factors[layout.link_index(out_l)] = alg.p
        in_l = (tail, k)
        if geom.link_exists(in_l):
            factors[layout.link_index(in_l)] = alg.p.conj().T
    s = 0.0 if is_even(vertex) else 1.0
    charge_phase = np.diag(np.exp(-2j * np.pi / layout.N * (np.array([0.0, 1.0]) - s)))
    factors[layout.fermion_index(vertex)] = charge_phase.astype(np.complex128)
    return factors


def gauss_expectations(state: StateVector) -> dict[Vertex, complex]:
    """<Theta(x)> for every vertex (1 on gauge-invariant states)."""
    out = {}
    for v in state.layout.geometry.vertices:
        rotated = apply_factors(state, gauss_law_operator(state.layout, v))
        out[v] = complex(np.vdot(state.amplitudes, rotated.amplitudes))
    return out


def project_gauge_invariant(layout: RegisterLayout, physical: np.ndarray) -> np.ndarray:
    """Project physical amplitudes onto the joint Theta(x)=1 sector."""
    N = layout.N
    out = physical.astype(np.complex128).copy()
    for v in layout.geometry.vertices:
        factors = gauss_law_operator(layout, v)
        acc = out.copy()
        rotated = out
        for _ in range(N - 1):
            rotated = apply_factors_physical(layout, rotated, factors)
            acc += rotated
        out = acc / N
    return out


def random_gauge_invariant_physical(layout: RegisterLayout, rng: np.random.Generator) -> np.ndarray:
    """Normalized random state in the gauge-invariant physical sector."""
    dim = layout.physical_dim
    raw = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    proj = project_gauge_invariant(layout, raw)
    nrm = np.linalg.norm(proj)
    if nrm < 1e-8:
        raise RuntimeError("random draw collapsed under gauge projection; reseed")
    return proj / nrm


# ---------------------------------------------------------------------------
# Hamiltonian terms


@dataclass(frozen=True)
class Couplings:
    lambda_e: float = 1.0
    lambda_b: float = 1.0
    lambda_gm: float = 1.0
    mass: float = 1.0
    h_e_variant: str = "group"   # "group" | "z3-implementation"

    def __post_init__(self):
        for name in ("lambda_e", "lambda_b", "lambda_gm", "mass"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"coupling {name} must be finite, got {v}")
        if self.h_e_variant not in ("group", "z3-implementation"):
            raise ValueError(f"unknown electric variant {self.h_e_variant!r}")


@dataclass(frozen=True)
class HamiltonianTerm:
    name: str
    coupling: float
    support: tuple[int, ...]
    layout: RegisterLayout
    couplings: "Couplings"

    def matrix(self) -> np.ndarray:
        """Dense Hermitian matrix on the physical registers (assembled on call)."""
        return term_matrix(self.layout, self.name, self.couplings)


def electric_single_link(alg: LinkAlgebra, variant: str) -> np.ndarray:
    """One-link electric energy: group form 1 - P - P!, or the
    staggered-label form diag(1 + |m_bar|) used by the three-level design."""
    if variant == "group":
        return np.eye(alg.N) - alg.p - alg.p.conj().T
    return np.diag(1.0 + np.abs(symmetric_representatives(alg.N))).astype(np.complex128)


def plaquette_factors(layout: RegisterLayout, p: Vertex) -> dict[int, np.ndarray]:
    """Oriented plaquette holonomy Q1 Q2 Q3! Q4! as a factor map."""
    alg = make_link_algebra(layout.N)
    factors: dict[int, np.ndarray] = {}
    for link, orient in layout.geometry.plaquette_links(p):
        m = alg.q if orient > 0 else alg.q.conj().T
        factors = multiply_factors(factors, {layout.link_index(link): m})
    return factors


def _term_matrix(layout: RegisterLayout, name: str, coupling: float,
                 h_e_variant: str = "group") -> np.ndarray:
    dim = layout.physical_dim
    geom = layout.geometry
    alg = make_link_algebra(layout.N)
    h = np.zeros((dim, dim), dtype=np.complex128)
    if name == "E":
        single = electric_single_link(alg, h_e_variant)
        for l in geom.links:
            h += embed_physical(layout, {layout.link_index(l): single})
        return coupling * h
    if name == "M":
        for v in geom.vertices:
            sign = 1.0 if is_even(v) else -1.0
            h += sign * embed_physical(layout, {layout.fermion_index(v): NUMBER_OP})
        return coupling * h
    if name in ("Be", "Bo"):
        want_even = name == "Be"
        for p in geom.plaquettes:
            if is_even(p) != want_even:
                continue
            holo = embed_physical(layout, plaquette_factors(layout, p))
            h += holo + holo.conj().T
        return coupling * h
    if name in ("GM_eh", "GM_ev", "GM_oh", "GM_ov"):
        cls = name.split("_")[1]
        for l in geom.links:
            if geom.link_class(l) != cls:
                continue
            hop = embed_physical(layout, hopping_factors(layout, l))
            h += hop + hop.conj().T
        return coupling * h
    raise ValueError(f"unknown Hamiltonian term {name!r}")


def build_hamiltonian_term(layout: RegisterLayout, name: str, couplings: Couplings) -> HamiltonianTerm:
    """One of the eight independently scheduled Hamiltonian pieces."""
    if name not in TERM_NAMES:
        raise ValueError(f"unknown term {name!r}; expected one of {TERM_NAMES}")
    geom = layout.geometry
    coupling = {
        "E": couplings.lambda_e,
        "M": couplings.mass,
        "Be": couplings.lambda_b,
        "Bo": couplings.lambda_b,
    }.get(name, couplings.lambda_gm)

    support: list[int] = []
    if name == "E":
        support = [layout.link_index(l) for l in geom.links]
    elif name == "M":
        support = [layout.fermion_index(v) for v in geom.vertices]
    elif name in ("Be", "Bo"):
        want_even = name == "Be"
        for p in geom.plaquettes:
            if is_even(p) == want_even:
                support.extend(layout.link_index(l) for l, _ in geom.plaquette_links(p))
    else:
        cls = name.split("_")[1]
        for l in geom.links:
            if geom.link_class(l) != cls:
                continue
            support.append(layout.link_index(l))
            support.append(layout.fermion_index(l[0]))
            support.append(layout.fermion_index(geom.link_head(l)))
    return HamiltonianTerm(name, coupling, tuple(sorted(set(support))), layout, couplings)


def term_matrix(layout: RegisterLayout, name: str, couplings: Couplings) -> np.ndarray:
    """Dense physical matrix of a named term, honoring the electric variant."""
    coupling = {
        "E": couplings.lambda_e,
        "M": couplings.mass,
        "Be": couplings.lambda_b,
        "Bo": couplings.lambda_b,
    }.get(name, couplings.lambda_gm)
    return _term_matrix(layout, name, coupling, couplings.h_e_variant)


def total_hamiltonian(layout: RegisterLayout, couplings: Couplings) -> np.ndarray:
    """Sum of the eight terms on the physical registers."""
    dim = layout.physical_dim
    h = np.zeros((dim, dim), dtype=np.complex128)
    for name in TERM_NAMES:
        h += term_matrix(layout, name, couplings)
    return h
