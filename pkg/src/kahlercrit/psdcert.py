"""Positive-semidefiniteness certificates for Hermitian coefficient matrices.

``psd_check`` runs a symmetric (congruence) elimination in the matrix's own
monomial order. Positive pivots are eliminated; a negative pivot, or a zero
pivot with a nonzero row, ends the run with a vector ``v`` such that
``v* M v < 0``. Working in the graded order means the factorization of a
degree-``d`` matrix is a prefix of the one at degree ``d + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .calabi import CoefficientMatrix
from .errors import CertificateError, DimensionError, NotHermitianError

OBSTRUCTED = "Obstructed"
NO_OBSTRUCTION = "NoObstructionUpToDegree"
DEFAULT_EPS = 1e-12


@dataclass(frozen=True)
class NegativityWitness:
    vector: tuple
    value: object


@dataclass(frozen=True)
class Verdict:
    """Outcome of a PSD check at a fixed truncation degree.

    ``NoObstructionUpToDegree`` only says that the degree-``d`` matrix is
    positive semidefinite; it never claims an immersion exists.
    """

    status: str
    degree: int
    certificate: NegativityWitness | None
    rank_lower_bound: int
    margin: object
    pivots: tuple = ()
    notes: tuple = field(default=())

    @property
    def obstructed(self) -> bool:
        return self.status == OBSTRUCTED


def quadratic_form(M: CoefficientMatrix, v) -> object:
    """``v* M v`` by direct summation."""
    if len(v) != M.size:
        raise DimensionError(f"vector length {len(v)} != matrix size {M.size}")
    be = M.backend
    total = be.zero
    for i, vi in enumerate(v):
        if vi == 0:
            continue
        ci = vi.conjugate()
        row = M.entries[i]
        for j, vj in enumerate(v):
            if vj != 0:
                total += ci * row[j] * vj
    return be.real(total) if not be.is_exact else total


def tolerance_band(M: CoefficientMatrix, tolerance=None):
    """Absolute threshold below which float pivots count as zero.

    ``eps * max|M_ij| * dim``; always 0 on the exact backend.
    """
    be = M.backend
    if be.is_exact:
        return be.zero
    eps = be.convert(DEFAULT_EPS if tolerance is None else tolerance)
    biggest = max((be.abs(x) for row in M.entries for x in row), default=be.zero)
    return eps * biggest * M.size


def validate_certificate(M: CoefficientMatrix, w: NegativityWitness, tolerance=None) -> bool:
    """Recompute ``v* M v`` and check that it is negative beyond the tolerance band."""
    value = quadratic_form(M, w.vector)
    if M.backend.is_exact:
        return value < 0
    return value <= -tolerance_band(M, tolerance) and value < 0


def psd_check(M: CoefficientMatrix, tolerance=None) -> Verdict:
    """Decide whether ``M`` is positive semidefinite.

    Parameters
    ----------
    M : CoefficientMatrix
    tolerance : float, optional
        Relative epsilon for the float backend (default ``1e-12``); a pivot
        ``p`` counts as negative when ``p < -eps * max|M_ij| * dim``. Ignored
        on the exact backend.

    Returns
    -------
    Verdict
        ``Obstructed`` with a validated witness, or
        ``NoObstructionUpToDegree`` with the number of positive pivots as the
        rank lower bound and the smallest positive pivot as the margin.
    """
    be = M.backend
    band = tolerance_band(M, tolerance)
    if not M.is_hermitian(band):
        raise NotHermitianError("coefficient matrix is not Hermitian")
    dim = M.size
    S = [list(row) for row in M.entries]
    W = [[be.one if i == j else be.zero for i in range(dim)] for j in range(dim)]
    pivots = []
    notes = []
    positive = []
    live = list(range(dim))

    def finish(vec, margin, extra=()):
        wit = NegativityWitness(tuple(vec), quadratic_form(M, vec))
        if not validate_certificate(M, wit, tolerance):
            return None
        return Verdict(OBSTRUCTED, M.degree, wit, len(positive), margin,
                       tuple(pivots), tuple(notes) + tuple(extra))

    while live:
        k = live.pop(0)
        p = be.real(S[k][k])
        if p > band:
            pivots.append(p)
            positive.append(p)
            for j in live:
                c = S[k][j] / p
                if c != 0:
                    W[j] = [wj - c * wk for wj, wk in zip(W[j], W[k])]
            for i in live:
                sik = S[i][k]
                if sik == 0:
                    continue
                for j in live:
                    S[i][j] -= sik * S[k][j] / p
            continue
        if p < -band:
            pivots.append(p)
            verdict = finish(W[k], p)
            if verdict is not None:
                return verdict
            notes.append(f"negative pivot at {M.labels[k]} failed validation")
            continue
        # zero (or marginal) pivot
        pivots.append(p)
        if p != 0:
            notes.append(f"marginal pivot at {M.labels[k]}")
        j = next((j for j in live if be.abs(S[k][j]) > band), None)
        if j is None:
            continue
        skj = S[k][j]
        sjj = be.real(S[j][j])
        if sjj > 0:
            t = -skj.conjugate() / sjj
            q = p - be.abs(skj) ** 2 / sjj
        else:
            t = -skj.conjugate()
            q = p - 2 * be.abs(skj) ** 2 + be.abs(skj) ** 2 * sjj
        vec = [wk + t * wj for wk, wj in zip(W[k], W[j])]
        verdict = finish(vec, q, (f"zero pivot at {M.labels[k]} with nonzero row",))
        if verdict is not None:
            return verdict
        notes.append(f"zero pivot at {M.labels[k]} left unresolved")
    margin = min(positive) if positive else be.zero
    return Verdict(NO_OBSTRUCTION, M.degree, None, len(positive), margin,
                   tuple(pivots), tuple(notes))


def rank_lower_bound(M: CoefficientMatrix, tolerance=None) -> int:
    """Number of strictly positive pivots of a PSD matrix.

    The resolvable rank at this truncation degree is at least this value.
    """
    verdict = psd_check(M, tolerance)
    if verdict.obstructed:
        raise CertificateError("matrix is not positive semidefinite; rank bound undefined")
    return verdict.rank_lower_bound
