"""Correctable observable extraction and recovery bookkeeping.

Given the true noise ``phi`` and an invertible guess ``phi_g``, the operator

    F = I - gamma_phi^dag @ (gamma_phi_g^-1)^dag

annihilates exactly those vectorized observables whose expectation value is
recovered, for every input state, by measuring the modified observable
``adjoint(inverse(phi_g))(A)`` on the noisy state.  This module extracts an
orthonormal Hermitian basis of that space, evaluates recovery quality per
(state, observable) pair, and ranks candidate guesses.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .channels import (
    DEFAULT_SV_CUTOFF,
    TransferMatrix,
    apply_channel,
    compose,
    devectorize,
    hs_inner,
    inverse_transfer,
    is_hermitian,
    random_density_matrix,
    vectorize,
)
from .errors import FamilyVerificationError, SingularChannelError

#: Default relative singular-value threshold for numerical kernel extraction.
DEFAULT_KERNEL_RTOL = 1e-8

#: Relative residual below which an observable counts as a span member.
MEMBERSHIP_RTOL = 1e-8

#: Seed for the Monte-Carlo self-check run by family constructors.
_SELF_CHECK_SEED = 20260811

#: Number of states drawn during the self-check.
_SELF_CHECK_STATES = 100

#: Largest admissible deviation for a self-checked family member.
_SELF_CHECK_DELTA = 1e-9


# ---------------------------------------------------------------------------
# Value types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GuessPair:
    """True channel, guessed channel, and the cached inverse of the guess."""

    phi: TransferMatrix
    phi_g: TransferMatrix
    phi_g_inv: TransferMatrix

    def __post_init__(self) -> None:
        if not (self.phi.dim == self.phi_g.dim == self.phi_g_inv.dim):
            raise ValueError("all transfer matrices must share one dimension")
        d2 = self.phi.dim**2
        residual = np.linalg.norm(compose(self.phi_g, self.phi_g_inv).gamma - np.eye(d2))
        if residual > 1e-10 * max(1.0, np.linalg.norm(self.phi_g.gamma)):
            raise ValueError(f"phi_g_inv is not the inverse of phi_g (residual {residual:.3e})")

    @property
    def dim(self) -> int:
        return self.phi.dim

    @classmethod
    def from_transfers(
        cls,
        phi: TransferMatrix,
        phi_g: TransferMatrix,
        sv_cutoff: float = DEFAULT_SV_CUTOFF,
    ) -> "GuessPair":
        """Build a pair from transfer matrices, inverting the guess eagerly.

        Raises
        ------
        SingularChannelError
            If the guess is not invertible at the given relative cutoff.
        """
        return cls(phi=phi, phi_g=phi_g, phi_g_inv=inverse_transfer(phi_g, sv_cutoff))


@dataclass(frozen=True)
class ObservableFamily:
    """Orthonormal Hermitian basis of a correctable-observable space."""

    dim: int
    basis: tuple[np.ndarray, ...]
    n_params: int

    def __post_init__(self) -> None:
        if self.n_params != len(self.basis):
            raise ValueError("n_params must equal the number of basis elements")
        frozen = []
        for k, A in enumerate(self.basis):
            A = np.asarray(A, dtype=complex)
            if A.shape != (self.dim, self.dim):
                raise ValueError(f"basis element {k} has shape {A.shape}, expected square {self.dim}")
            if not is_hermitian(A, 1e-10):
                raise ValueError(f"basis element {k} is not Hermitian within 1e-10")
            A = A.copy()
            A.setflags(write=False)
            frozen.append(A)
        for i, A in enumerate(frozen):
            for j, B in enumerate(frozen):
                target = 1.0 if i == j else 0.0
                if abs(hs_inner(A, B) - target) > 1e-10:
                    raise ValueError(f"basis elements {i},{j} are not orthonormal within 1e-10")
        object.__setattr__(self, "basis", tuple(frozen))

    @classmethod
    def from_basis(cls, dim: int, basis: Sequence[np.ndarray]) -> "ObservableFamily":
        return cls(dim=dim, basis=tuple(basis), n_params=len(basis))

    def member(self, coefficients: Sequence[float]) -> np.ndarray:
        """Real linear combination of the basis elements."""
        coeff = np.asarray(coefficients, dtype=float)
        if coeff.size != self.n_params:
            raise ValueError(f"expected {self.n_params} coefficients, got {coeff.size}")
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for c, A in zip(coeff, self.basis):
            out += c * A
        return out


@dataclass(frozen=True)
class DeconvReport:
    """Ideal, raw and deconvolved expectation values for one (state, observable)."""

    ideal: float
    experimental: float
    deconvolved: float
    delta_exp: float
    delta_nd: float
    improved: bool
    #: Exact tie between the two deviations; reported as not improved.
    tie: bool


# ---------------------------------------------------------------------------
# Numerical null spaces with a deterministic ordering
# ---------------------------------------------------------------------------

def _fix_vector_phase(v: np.ndarray) -> np.ndarray:
    """Rotate ``v`` so its largest-magnitude entry is real positive."""
    idx = int(np.argmax(np.abs(v)))
    z = v[idx]
    if abs(z) == 0.0:
        return v
    return v * (np.conj(z) / abs(z))


def _lexicographic_key(v: np.ndarray) -> tuple:
    rounded = np.round(v, 12)
    return tuple(x for entry in rounded for x in (entry.real, entry.imag))


def _ordered_null_basis(M: np.ndarray, keep: Callable[[np.ndarray], np.ndarray]) -> list[np.ndarray]:
    """Right-singular vectors of ``M`` selected by ``keep`` on the singular values.

    Vectors come out phase-fixed and sorted by ascending singular value,
    ties broken by lexicographic comparison of the rounded entries.
    """
    M = np.asarray(M, dtype=complex)
    _, s, vh = np.linalg.svd(M, full_matrices=True)
    svals = np.zeros(vh.shape[0])
    svals[: s.size] = s
    mask = keep(svals)
    picked = [(svals[i], _fix_vector_phase(vh[i].conj())) for i in np.nonzero(mask)[0]]
    picked.sort(key=lambda t: (t[0], _lexicographic_key(t[1])))
    return [v for _, v in picked]


#: Singular values below this count as zero even when the largest one is
#: itself negligible, so a numerically zero operator keeps a full kernel.
_KERNEL_ABS_FLOOR = 1e-14


def kernel(F: np.ndarray, rel_tol: float = DEFAULT_KERNEL_RTOL) -> list[np.ndarray]:
    """Orthonormal basis of the numerical null space of a square matrix.

    Keeps right-singular vectors whose singular value is at most
    ``max(rel_tol * sigma_max, 1e-14)``; for ``F == 0`` (exactly or to
    rounding) every direction qualifies.  An empty list means the kernel is
    trivial.
    """
    F = np.asarray(F, dtype=complex)
    if F.ndim != 2 or F.shape[0] != F.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {F.shape}")
    return _ordered_null_basis(F, lambda s: s <= max(rel_tol * s.max(), _KERNEL_ABS_FLOOR))


def joint_kernel(mats: Sequence[np.ndarray], dim2: int, rel_tol: float = DEFAULT_KERNEL_RTOL) -> list[np.ndarray]:
    """Common null space of several operators, via the stacked system.

    Each block is normalized by its largest singular value so no single
    operator dominates the cutoff.  Blocks that are numerically zero impose
    no constraint; with no effective constraint the full space is returned.
    """
    blocks = []
    for M in mats:
        M = np.asarray(M, dtype=complex)
        if M.shape != (dim2, dim2):
            raise ValueError(f"expected {dim2}x{dim2} blocks, got {M.shape}")
        top = np.linalg.norm(M, 2)
        # a numerically zero block constrains nothing; normalizing it would
        # amplify rounding noise into a fake constraint
        if top > 1e-12:
            blocks.append(M / top)
    if not blocks:
        return kernel(np.zeros((dim2, dim2)), rel_tol)
    return _ordered_null_basis(
        np.vstack(blocks), lambda s: s <= max(rel_tol * s.max(), _KERNEL_ABS_FLOOR)
    )


# ---------------------------------------------------------------------------
# Hermitian section and span utilities
# ---------------------------------------------------------------------------

def _swap_permutation(d: int) -> np.ndarray:
    P = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            P[i * d + j, j * d + i] = 1.0
    return P


def _fix_matrix_sign(A: np.ndarray) -> np.ndarray:
    """Flip the overall sign so the largest-magnitude entry leads positive.

    For a Hermitian matrix only +-1 rescalings preserve Hermiticity, so the
    convention is: at the first row-major entry of maximal magnitude, make
    the real part positive (or the imaginary part, when the real part
    vanishes).
    """
    flat = A.reshape(-1)
    idx = int(np.argmax(np.abs(flat)))
    z = flat[idx]
    if abs(z) == 0.0:
        return A
    lead = z.real if abs(z.real) > 1e-12 * abs(z) else z.imag
    return -A if lead < 0 else A


def gram_schmidt(mats: Sequence[np.ndarray], drop_tol: float = 1e-10) -> list[np.ndarray]:
    """Orthonormalize matrices under the Hilbert-Schmidt inner product.

    Modified Gram-Schmidt with one re-orthogonalization pass; deterministic
    given the input order.  Matrices whose residual norm falls below
    ``drop_tol`` (relative to the largest input norm) are dropped.
    """
    scale = max((np.linalg.norm(A) for A in mats), default=1.0)
    out: list[np.ndarray] = []
    for A in mats:
        A = np.asarray(A, dtype=complex)
        for _ in range(2):
            for B in out:
                A = A - hs_inner(B, A) * B
        norm = np.sqrt(hs_inner(A, A).real)
        if norm > drop_tol * max(scale, 1.0):
            out.append(A / norm)
    return out


def hermitian_section(kernel_basis: Sequence[np.ndarray], d: int) -> ObservableFamily:
    """Hermitian observables whose vectorization lies in a given complex span.

    The span is treated as a real vector space of dimension ``2 * len(basis)``
    (generators ``v_k`` and ``i v_k``); intersecting with the fixed-point
    space of ``A -> A^dag`` amounts to solving ``P v = conj(v)`` where ``P``
    swaps the two vectorization indices.  The real null space of that
    constraint, mapped back to matrices and orthonormalized, is the family.
    """
    vecs = [np.asarray(v, dtype=complex).reshape(-1) for v in kernel_basis]
    for v in vecs:
        if v.size != d * d:
            raise ValueError(f"kernel vector of length {v.size} does not match dim {d}")
    if not vecs:
        return ObservableFamily.from_basis(d, [])

    generators = vecs + [1j * v for v in vecs]
    P = _swap_permutation(d)
    columns = []
    for g in generators:
        w = P @ g - np.conj(g)
        columns.append(np.concatenate([w.real, w.imag]))
    constraint = np.column_stack(columns)

    _, s, vh = np.linalg.svd(constraint, full_matrices=True)
    svals = np.zeros(vh.shape[0])
    svals[: s.size] = s
    cutoff = 1e-10 * max(svals.max(), 1.0)
    coeffs = [vh[i].real for i in range(vh.shape[0]) if svals[i] <= cutoff]

    mats = []
    for c in coeffs:
        v = sum(ck * gk for ck, gk in zip(c, generators))
        A = devectorize(v, d)
        A = 0.5 * (A + A.conj().T)
        mats.append(A)
    basis = [_fix_matrix_sign(A) for A in gram_schmidt(mats)]
    return ObservableFamily.from_basis(d, basis)


def intersect_spans(B1: Sequence[np.ndarray], B2: Sequence[np.ndarray], tol: float = 1e-10) -> list[np.ndarray]:
    """Orthonormal basis of the intersection of two vector spans.

    Spans of dimensions m and n in ambient dimension D intersect in
    dimension ``m + n - rank([B1 B2])``; members come from the null space of
    the stacked system ``[B1, -B2] c = 0`` mapped through ``B1``.
    """
    if not B1 or not B2:
        return []
    M1 = np.column_stack([np.asarray(v, dtype=complex).reshape(-1) for v in B1])
    M2 = np.column_stack([np.asarray(v, dtype=complex).reshape(-1) for v in B2])
    stacked = np.hstack([M1, -M2])
    _, s, vh = np.linalg.svd(stacked, full_matrices=True)
    svals = np.zeros(vh.shape[0])
    svals[: s.size] = s
    null_cols = [vh[i].conj() for i in range(vh.shape[0]) if svals[i] <= tol * max(svals.max(), 1.0)]
    members = [M1 @ c[: M1.shape[1]] for c in null_cols]
    ortho = []
    for v in members:
        for _ in range(2):
            for u in ortho:
                v = v - np.vdot(u, v) * u
        norm = np.linalg.norm(v)
        if norm > 1e-10:
            ortho.append(_fix_vector_phase(v / norm))
    return ortho


def membership_residual(fam: ObservableFamily, A: np.ndarray) -> float:
    """Relative distance from ``A`` to the span of a family (0 for members)."""
    A = np.asarray(A, dtype=complex)
    norm = np.linalg.norm(A)
    if norm == 0.0:
        return 0.0
    proj = np.zeros_like(A)
    for B in fam.basis:
        proj += hs_inner(B, A) * B
    return float(np.linalg.norm(A - proj) / norm)


def span_residual(fam_a: ObservableFamily, fam_b: ObservableFamily) -> float:
    """Largest membership residual of ``fam_a`` members inside ``fam_b``'s span."""
    if fam_a.n_params == 0:
        return 0.0
    return max(membership_residual(fam_b, A) for A in fam_a.basis)


def spans_coincide(fam_a: ObservableFamily, fam_b: ObservableFamily, tol: float = MEMBERSHIP_RTOL) -> bool:
    """Whether two families span the same space (mutual residual within ``tol``)."""
    return (
        fam_a.n_params == fam_b.n_params
        and span_residual(fam_a, fam_b) <= tol
        and span_residual(fam_b, fam_a) <= tol
    )


# ---------------------------------------------------------------------------
# Deviation operator and recovery evaluation
# ---------------------------------------------------------------------------

def deviation_operator(gp: GuessPair) -> np.ndarray:
    """``I - gamma_phi^dag @ gamma_{phi_g^-1}^dag``; its kernel is the correctable space."""
    d2 = gp.dim**2
    return np.eye(d2) - gp.phi.gamma.conj().T @ gp.phi_g_inv.gamma.conj().T


def modified_observable(gp: GuessPair, A: np.ndarray) -> np.ndarray:
    """Observable to measure on the noisy state in place of ``A``.

    Applies the adjoint of the inverted guess: ``devec(gamma_inv^dag vec(A))``.
    The inverse of an invertible completely positive map preserves
    Hermiticity, so the result is checked to be Hermitian within 1e-10.
    """
    A = np.asarray(A, dtype=complex)
    if A.shape != (gp.dim, gp.dim):
        raise ValueError(f"observable shape {A.shape} does not match dim {gp.dim}")
    out = devectorize(gp.phi_g_inv.gamma.conj().T @ vectorize(A), gp.dim)
    herm_residual = np.linalg.norm(out - out.conj().T)
    if herm_residual > 1e-10 * max(1.0, np.linalg.norm(out)):
        raise ValueError(
            f"modified observable lost Hermiticity (residual {herm_residual:.3e}); "
            "the guess inverse is numerically unreliable"
        )
    return out


def expectation(A: np.ndarray, rho: np.ndarray) -> float:
    """Real expectation value ``Tr(A rho)`` of a Hermitian observable."""
    A = np.asarray(A, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    if A.shape != rho.shape or A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"shape mismatch: observable {A.shape} vs state {rho.shape}")
    value = complex(np.trace(A @ rho))
    scale = max(1.0, np.linalg.norm(A) * np.linalg.norm(rho))
    if abs(value.imag) > 1e-10 * scale:
        raise ValueError(f"expectation value has imaginary residual {value.imag:.3e}")
    return value.real


def evaluate(gp: GuessPair, A: np.ndarray, rho: np.ndarray) -> DeconvReport:
    """Ideal, noisy and deconvolved expectation values plus their deviations.

    The deconvolved value is computed both as ``Tr(modified(A) Phi(rho))``
    and through the vectorized bilinear form; the two must agree to 1e-10.
    """
    ideal = expectation(A, rho)
    noisy_state = apply_channel(gp.phi, rho)
    experimental = expectation(A, noisy_state)
    deconvolved = expectation(modified_observable(gp, A), noisy_state)

    bilinear = complex(
        vectorize(rho).conj() @ (gp.phi.gamma.conj().T @ (gp.phi_g_inv.gamma.conj().T @ vectorize(A)))
    )
    scale = max(1.0, abs(deconvolved))
    if abs(bilinear.real - deconvolved) > 1e-10 * scale:
        raise ValueError(
            f"trace and vectorized deconvolution paths disagree: "
            f"{deconvolved} vs {bilinear.real}"
        )

    delta_exp = abs(ideal - experimental)
    delta_nd = abs(ideal - deconvolved)
    tie = delta_nd == delta_exp
    return DeconvReport(
        ideal=ideal,
        experimental=experimental,
        deconvolved=deconvolved,
        delta_exp=delta_exp,
        delta_nd=delta_nd,
        improved=delta_nd < delta_exp,
        tie=tie,
    )


# ---------------------------------------------------------------------------
# Family extraction
# ---------------------------------------------------------------------------

def verify_family(gp: GuessPair, fam: ObservableFamily, n_states: int, seed: int) -> float:
    """Monte-Carlo check of perfect recovery over seeded random states.

    Draws ``n_states`` random density matrices and, per state, evaluates
    every basis element plus two random real combinations.  Returns the
    maximum observed deviation of the deconvolved expectation value.
    """
    if fam.n_params == 0:
        raise ValueError("cannot verify an empty family")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_states):
        rho = random_density_matrix(gp.dim, rng)
        candidates = list(fam.basis)
        for _ in range(2):
            coeff = rng.normal(size=fam.n_params)
            coeff /= np.linalg.norm(coeff)
            candidates.append(fam.member(coeff))
        for A in candidates:
            worst = max(worst, evaluate(gp, A, rho).delta_nd)
    return worst


def correctable_family(
    gp: GuessPair,
    rel_tol: float = DEFAULT_KERNEL_RTOL,
    self_check: bool = True,
) -> ObservableFamily:
    """Full family of observables with exactly recoverable expectation values.

    Extracts the Hermitian section of the deviation operator's kernel.  With
    ``self_check`` on (the default), the result is verified by Monte-Carlo
    over 100 seeded states before being returned.

    Raises
    ------
    FamilyVerificationError
        If a self-checked basis element deviates by more than 1e-9.
    """
    fam = hermitian_section(kernel(deviation_operator(gp), rel_tol), gp.dim)
    if self_check and fam.n_params > 0:
        worst = verify_family(gp, fam, _SELF_CHECK_STATES, _SELF_CHECK_SEED)
        if worst > _SELF_CHECK_DELTA:
            raise FamilyVerificationError(
                f"family self-check failed: max deviation {worst:.3e} > {_SELF_CHECK_DELTA:g}; "
                "consider a tighter kernel tolerance"
            )
    return fam


def common_correctable_family(
    gps: Sequence[GuessPair],
    rel_tol: float = DEFAULT_KERNEL_RTOL,
    self_check: bool = True,
    check_states: int = 50,
) -> ObservableFamily:
    """Family correctable for every listed (true channel, guess) pair at once.

    Used when the true channel carries unknown parameters: probe it at
    several parameter values (all sharing the guess), intersect the kernels
    by stacking the deviation operators, and take the Hermitian section.
    """
    if not gps:
        raise ValueError("need at least one pair")
    d = gps[0].dim
    if any(gp.dim != d for gp in gps):
        raise ValueError("all pairs must share one dimension")
    vecs = joint_kernel([deviation_operator(gp) for gp in gps], d * d, rel_tol)
    fam = hermitian_section(vecs, d)
    if self_check and fam.n_params > 0:
        for k, gp in enumerate(gps):
            worst = verify_family(gp, fam, check_states, _SELF_CHECK_SEED + k)
            if worst > _SELF_CHECK_DELTA:
                raise FamilyVerificationError(
                    f"family self-check failed on pair {k}: max deviation {worst:.3e}"
                )
    return fam


def guess_sweep(
    phi: TransferMatrix,
    candidates: Sequence[TransferMatrix],
    rel_tol: float = DEFAULT_KERNEL_RTOL,
) -> list[tuple[int, int]]:
    """Rank candidate guesses by the size of the family they make correctable.

    Returns ``(candidate index, n_params)`` pairs sorted by descending
    ``n_params`` with ties broken by ascending index.  Candidates whose
    transfer matrix is singular are kept in the ranking with ``n_params = -1``.
    """
    results = []
    for idx, cand in enumerate(candidates):
        try:
            gp = GuessPair.from_transfers(phi, cand)
        except SingularChannelError:
            results.append((idx, -1))
            continue
        fam = correctable_family(gp, rel_tol)
        results.append((idx, fam.n_params))
    results.sort(key=lambda t: (-t[1], t[0]))
    return results

