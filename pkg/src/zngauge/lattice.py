"""Lattice geometry, register layout, and the mixed-radix state vector.

The simulated system lives on an open Lx x Ly square lattice:

        (0,1) --h-- (1,1)
          |           |
          v           v
          |           |
        (0,0) --h-- (1,0)

Vertices carry one fermionic mode each (local dim 2), links carry one
Z_N degree of freedom (local dim N), and each plaquette may carry one
N-dimensional ancilla used by the gate compiler.  A link is named by
the vertex it leaves and its direction: (x, 1) points along +x1,
(x, 2) along +x2; links whose head would leave the lattice do not
exist.  Plaquettes are named by their bottom-left vertex.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

NORM_TOL = 1e-12      # state vectors must stay normalized to this
UNITARITY_TOL = 1e-12  # gates must be unitary to this

Vertex = tuple[int, int]
Link = tuple[Vertex, int]


def is_even(x: Vertex) -> bool:
    """Parity class of a vertex / link origin / plaquette label."""
    return (x[0] + x[1]) % 2 == 0


@dataclass(frozen=True)
class LatticeGeometry:
    """Open Lx x Ly lattice with derived vertex/link/plaquette enumerations."""

    Lx: int
    Ly: int

    def __post_init__(self):
        if self.Lx < 1 or self.Ly < 1:
            raise ValueError(f"lattice extents must be positive, got {self.Lx}x{self.Ly}")

    @property
    def vertices(self) -> list[Vertex]:
        """Row-major (x2 major, x1 minor) vertex list."""
        return [(x1, x2) for x2 in range(self.Ly) for x1 in range(self.Lx)]

    @property
    def links(self) -> list[Link]:
        """All existing links, sorted by (origin, direction)."""
        out = []
        for x2 in range(self.Ly):
            for x1 in range(self.Lx):
                if x1 + 1 < self.Lx:
                    out.append(((x1, x2), 1))
                if x2 + 1 < self.Ly:
                    out.append(((x1, x2), 2))
        return sorted(out)

    @property
    def plaquettes(self) -> list[Vertex]:
        """Bottom-left labels x such that x+1^ and x+2^ stay inside."""
        return [(x1, x2) for x2 in range(self.Ly - 1) for x1 in range(self.Lx - 1)]

    def link_exists(self, link: Link) -> bool:
        (x1, x2), k = link
        if not (0 <= x1 < self.Lx and 0 <= x2 < self.Ly):
            return False
        if k == 1:
            return x1 + 1 < self.Lx
        if k == 2:
            return x2 + 1 < self.Ly
        return False

    def link_head(self, link: Link) -> Vertex:
        (x1, x2), k = link
        return (x1 + 1, x2) if k == 1 else (x1, x2 + 1)

    def plaquette_links(self, p: Vertex) -> list[tuple[Link, int]]:
        """Counterclockwise plaquette boundary as (link, orientation).

        Orientation +1 for the bottom and right edges (traversed along the
        link direction), -1 for the top and left edges (traversed against).
        """
        if p not in set(self.plaquettes):
            raise ValueError(f"no plaquette at {p}")
        x1, x2 = p
        return [
            (((x1, x2), 1), +1),
            (((x1 + 1, x2), 2), +1),
            (((x1, x2 + 1), 1), -1),
            (((x1, x2), 2), -1),
        ]

    def link_class(self, link: Link) -> str:
        """One of 'eh', 'oh', 'ev', 'ov' by origin parity and direction."""
        x, k = link
        pe = is_even(x)
        if k == 1:
            return "eh" if pe else "oh"
        return "ev" if pe else "ov"


@dataclass(frozen=True)
class Register:
    kind: str          # "link" | "fermion" | "ancilla"
    site: tuple        # link tuple, vertex, or plaquette label
    dim: int


@dataclass(frozen=True)
class RegisterLayout:
    """Ordered registers: fermions (row-major), then links, then ancillas."""

    geometry: LatticeGeometry
    N: int
    ancilla_policy: str
    registers: tuple[Register, ...]
    # plaquette label -> index of the ancilla register serving it
    ancilla_of_plaquette: dict = field(compare=False)

    @property
    def dims(self) -> np.ndarray:
        return np.array([r.dim for r in self.registers], dtype=np.int64)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def physical_dim(self) -> int:
        """Product of non-ancilla local dimensions."""
        return int(np.prod([r.dim for r in self.registers if r.kind != "ancilla"]))

    def index_of(self, kind: str, site) -> int:
        for i, r in enumerate(self.registers):
            if r.kind == kind and r.site == site:
                return i
        raise KeyError(f"no {kind} register at {site}")

    def fermion_index(self, vertex: Vertex) -> int:
        return self.index_of("fermion", vertex)

    def link_index(self, link: Link) -> int:
        return self.index_of("link", link)

    def ancilla_indices(self) -> list[int]:
        return [i for i, r in enumerate(self.registers) if r.kind == "ancilla"]

    def fermion_mode(self, vertex: Vertex) -> int:
        """Position of the vertex in the fermionic (row-major) mode order."""
        x1, x2 = vertex
        if not (0 <= x1 < self.geometry.Lx and 0 <= x2 < self.geometry.Ly):
            raise KeyError(f"vertex {vertex} outside lattice")
        return x2 * self.geometry.Lx + x1


def build_layout(geometry: LatticeGeometry, N: int, ancilla_policy: str = "per_plaquette") -> RegisterLayout:
    """Deterministic register layout for a geometry and Z_N dimension.

    ancilla_policy:
      "per_plaquette" -- one ancilla per plaquette (default; every plaquette
                         can host its own control).
      "shared"        -- one ancilla per even plaquette, reused by the odd
                         plaquette immediately to its right.  Odd plaquettes
                         with no even plaquette on their left are an error.
    """
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    if ancilla_policy not in ("per_plaquette", "shared"):
        raise ValueError(f"unknown ancilla policy {ancilla_policy!r}")

    regs: list[Register] = []
    for v in geometry.vertices:
        regs.append(Register("fermion", v, 2))
    for l in geometry.links:
        regs.append(Register("link", l, N))

    plaqs = geometry.plaquettes
    anc_sites: list[Vertex] = []
    serving: dict[Vertex, Vertex] = {}
    if ancilla_policy == "per_plaquette":
        for p in plaqs:
            anc_sites.append(p)
            serving[p] = p
    else:
        evens = [p for p in plaqs if is_even(p)]
        anc_sites.extend(evens)
        for p in plaqs:
            if is_even(p):
                serving[p] = p
            else:
                left = (p[0] - 1, p[1])
                if left not in evens:
                    raise ValueError(
                        f"shared ancilla policy: odd plaquette {p} has no even plaquette to its left"
                    )
                serving[p] = left

    offset = len(regs)
    for s in anc_sites:
        regs.append(Register("ancilla", s, N))
    anc_index = {
        p: offset + anc_sites.index(serving[p]) for p in plaqs
    }
    return RegisterLayout(geometry, N, ancilla_policy, tuple(regs), anc_index)


@dataclass
class StateVector:
    """Complex amplitudes over the mixed-radix basis of a RegisterLayout.

    Index convention: basis index = sum_i digit_i * stride_i with register 0
    the slowest (most significant) digit, matching numpy reshape order.
    """

    layout: RegisterLayout
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (self.layout.total_dim,):
            raise ValueError(
                f"amplitude length {self.amplitudes.shape} != layout dim {self.layout.total_dim}"
            )
        n = np.linalg.norm(self.amplitudes)
        if abs(n - 1.0) > 1e-9:
            raise ValueError(f"state not normalized: ||psi|| = {n}")

    def copy(self) -> "StateVector":
        return StateVector(self.layout, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def basis_state(layout: RegisterLayout, digits: dict[int, int]) -> StateVector:
    """Product basis state with given digit per register index (default 0)."""
    dims = layout.dims
    idx = 0
    for i, d in enumerate(dims):
        dig = digits.get(i, 0)
        if not (0 <= dig < d):
            raise ValueError(f"digit {dig} out of range for register {i} (dim {d})")
        idx = idx * d + dig
    amp = np.zeros(layout.total_dim, dtype=np.complex128)
    amp[idx] = 1.0
    return StateVector(layout, amp)


def build_global_singlet(layout: RegisterLayout) -> StateVector:
    """Reference gauge-invariant state.

    Links in |m=0>, fermions filling every odd vertex (the staggered
    vacuum), each ancilla in the uniform superposition |in~>, which is the
    eigenvalue-1 eigenvector of the ancilla shift operator.
    """
    dims = layout.dims
    amp = np.zeros(layout.total_dim, dtype=np.complex128)
    amp[0] = 1.0
    amp = amp.reshape(dims)
    # occupy odd fermions: move the 1 from digit 0 to digit 1 on those axes
    for i, r in enumerate(layout.registers):
        if r.kind == "fermion" and not is_even(r.site):
            amp = np.roll(amp, 1, axis=i)
        elif r.kind == "ancilla":
            uniform = np.ones(r.dim) / np.sqrt(r.dim)
            shape = [1] * len(dims)
            shape[i] = r.dim
            amp = amp.sum(axis=i, keepdims=True) * uniform.reshape(shape)
    return StateVector(layout, amp.reshape(-1))


def apply_gate(state: StateVector, gate_matrix: np.ndarray, targets: list[int]) -> StateVector:
    """Apply a unitary acting on the given registers.

    The gate matrix is indexed in the row-major mixed-radix basis of the
    target registers, in the order given by `targets`.
    """
    amp = _apply_gate_array(state.amplitudes, state.layout, gate_matrix, targets)
    out = StateVector(state.layout, amp)
    return out


def _apply_gate_array(amplitudes: np.ndarray, layout: RegisterLayout,
                      gate_matrix: np.ndarray, targets) -> np.ndarray:
    """Gate kernel on raw amplitudes; trailing axes beyond the layout are batch."""
    targets = list(targets)
    dims = layout.dims
    nreg = len(dims)
    if len(set(targets)) != len(targets):
        raise ValueError(f"repeated targets: {targets}")
    for t in targets:
        if not (0 <= t < nreg):
            raise ValueError(f"target {t} out of range (have {nreg} registers)")
    gate = np.asarray(gate_matrix, dtype=np.complex128)
    d_gate = int(np.prod([dims[t] for t in targets]))
    if gate.shape != (d_gate, d_gate):
        raise ValueError(f"gate shape {gate.shape} != target dim {d_gate}")
    err = np.abs(gate.conj().T @ gate - np.eye(d_gate)).max()
    if err > UNITARITY_TOL:
        raise ValueError(f"gate not unitary: max |U!U - 1| = {err:.3e}")

    batch_shape = amplitudes.shape[1:] if amplitudes.ndim > 1 else ()
    work = amplitudes.reshape(tuple(dims) + batch_shape)
    front = list(range(len(targets)))
    work = np.moveaxis(work, targets, front)
    moved_shape = work.shape
    work = work.reshape(d_gate, -1)
    work = gate @ work
    work = work.reshape(moved_shape)
    work = np.moveaxis(work, front, targets)
    return work.reshape(amplitudes.shape)


def fidelity_up_to_phase(a: StateVector, b: StateVector) -> float:
    """|<a|b>| -- insensitive to a global phase."""
    if a.amplitudes.shape != b.amplitudes.shape:
        raise ValueError("state length mismatch")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)))


def ancilla_restoration_fidelity(state: StateVector) -> float:
    """Overlap of the state with the |in~>-restored-ancilla subspace.

    Projects every ancilla register onto the uniform superposition and
    returns the resulting norm (1 means the ancillas are exactly back).
    """
    layout = state.layout
    amp = state.amplitudes.reshape(layout.dims)
    for i in layout.ancilla_indices():
        d = layout.registers[i].dim
        uniform = np.ones(d) / np.sqrt(d)
        shape = [1] * amp.ndim
        shape[i] = d
        overlap = np.tensordot(amp, uniform, axes=([i], [0]))
        amp = np.expand_dims(overlap, i) * uniform.reshape(shape)
    return float(np.linalg.norm(amp))


def project_ancillas(amplitudes: np.ndarray, layout: RegisterLayout) -> np.ndarray:
    """Contract each ancilla axis with <in~|, returning physical amplitudes.

    Accepts a trailing batch axis; the result has the ancilla axes removed.
    """
    batch_shape = amplitudes.shape[1:] if amplitudes.ndim > 1 else ()
    work = amplitudes.reshape(tuple(layout.dims) + batch_shape)
    for i in sorted(layout.ancilla_indices(), reverse=True):
        d = layout.registers[i].dim
        uniform = np.ones(d) / np.sqrt(d)
        work = np.tensordot(work, uniform, axes=([i], [0]))
    return work.reshape((-1,) + batch_shape)


def lift_physical(amplitudes: np.ndarray, layout: RegisterLayout) -> np.ndarray:
    """Tensor physical amplitudes with |in~> on every ancilla register.

    Inverse of project_ancillas on the restored-ancilla subspace.  Accepts a
    trailing batch axis.
    """
    batch_shape = amplitudes.shape[1:] if amplitudes.ndim > 1 else ()
    phys_dims = [r.dim for r in layout.registers if r.kind != "ancilla"]
    work = amplitudes.reshape(tuple(phys_dims) + batch_shape)
    for i in layout.ancilla_indices():
        d = layout.registers[i].dim
        uniform = np.ones(d) / np.sqrt(d)
        work = np.expand_dims(work, i)
        shape = [1] * (work.ndim)
        shape[i] = d
        work = work * uniform.reshape(shape)
    return work.reshape((-1,) + batch_shape)


def born_sample(state: StateVector, rng: np.random.Generator, shots: int) -> np.ndarray:
    """Sample basis states; returns an array of digit rows (shots x registers)."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    p = np.abs(state.amplitudes) ** 2
    p = p / p.sum()
    flat = rng.choice(len(p), size=shots, p=p)
    dims = state.layout.dims
    digits = np.zeros((shots, len(dims)), dtype=np.int64)
    rem = flat.copy()
    for i in range(len(dims) - 1, -1, -1):
        digits[:, i] = rem % dims[i]
        rem //= dims[i]
    return digits
