"""Security figures of merit: QBER, high-dimensional entropy, mutual
information, multi-photon fraction, and the GLLP secret key rate.

Two key-rate variants are provided. The published formula multiplies the
privacy term by 1 (binary normalization); only the variant that uses
log2(d) instead reproduces the reference summary-table rates in d = 4, so
that variant is the default and both are always reported.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import CountsTable, ScatteringMatrix

_IDENTITY_TOL = 1e-12


@dataclass(frozen=True)
class PhotonStatistics:
    """Source photon-number statistics entering the GLLP bound.

    mu    : mean photon number per pulse
    q_mu  : yield per signal state (probability of a detection)
    p0/p1 : vacuum and single-photon emission probabilities
    """

    mu: float
    q_mu: float
    p0: float
    p1: float

    def __post_init__(self):
        if not 0 < self.q_mu <= 1:
            raise ValueError(f"q_mu must be in (0, 1], got {self.q_mu}")
        if self.p0 < 0 or self.p1 < 0 or self.p0 + self.p1 > 1 + 1e-12:
            raise ValueError("p0, p1 must be non-negative with p0 + p1 <= 1")
        if self.mu < 0:
            raise ValueError("mu must be non-negative")

    @classmethod
    def poissonian(cls, mu: float, q_mu: float) -> "PhotonStatistics":
        """Poissonian source: p0 = exp(-mu), p1 = mu exp(-mu)."""
        return cls(mu=mu, q_mu=q_mu, p0=math.exp(-mu), p1=mu * math.exp(-mu))


def multiphoton_fraction(stats: PhotonStatistics) -> float:
    """Delta = (1 - p0 - p1) / q_mu, clamped to [0, 1]."""
    delta = (1.0 - stats.p0 - stats.p1) / stats.q_mu
    return min(max(delta, 0.0), 1.0)


def hd_entropy(e: float, d: int) -> float:
    """High-dimensional Shannon entropy of the error distribution.

    H_d(e) = -(1 - e) log2(1 - e) - e log2(e / (d - 1)); H_d(0) = 0 and the
    maximum log2(d) sits at e = (d - 1)/d. Endpoint limits are continuous.
    """
    if not 0.0 <= e <= 1.0:
        raise ValueError(f"error rate must be in [0, 1], got {e}")
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    out = 0.0
    if e < 1.0:
        out -= (1.0 - e) * math.log2(1.0 - e)
    if e > 0.0:
        out -= e * math.log2(e / (d - 1))
    return out


def mutual_information(e: float, d: int) -> float:
    """I_AB = log2(d) + (1-e) log2(1-e) + e log2(e / (d-1)), bits per photon."""
    direct = math.log2(d)
    if e < 1.0:
        direct += (1.0 - e) * math.log2(1.0 - e)
    if e > 0.0:
        direct += e * math.log2(e / (d - 1))
    via_entropy = math.log2(d) - hd_entropy(e, d)
    assert abs(direct - via_entropy) < _IDENTITY_TOL, "entropy identity violated"
    return direct


@dataclass(frozen=True)
class KeyRateResult:
    """GLLP key rate in both variants; negative rates are kept, flagged."""

    variant: str
    r_delta: float
    per_signal: float
    per_signal_as_printed: float
    per_signal_table_consistent: float
    secure: bool

    def to_json_dict(self) -> dict:
        return {
            "variant": self.variant,
            "r_delta": self.r_delta,
            "per_signal": self.per_signal,
            "per_signal_as_printed": self.per_signal_as_printed,
            "per_signal_table_consistent": self.per_signal_table_consistent,
            "secure": self.secure,
        }


def key_rate(e: float, delta: float, d: int = 4, f_ec: float = 1.2,
             q_mu: float = 1.0, variant: str = "table_consistent") -> KeyRateResult:
    """Practical secret key rate after multi-photon (GLLP) correction.

    as_printed:        R = Q_mu [ (1-D)(1 - H_d(e/(1-D))) - f_EC H_d(e) ]
    table_consistent:  R = Q_mu [ (1-D)(log2 d - H_d(e/(1-D))) - f_EC H_d(e) ]

    Both are computed; `variant` selects which one populates r_delta and
    per_signal. A negative selected rate sets secure=False (never clamped).
    """
    if variant not in ("as_printed", "table_consistent"):
        raise ValueError(f"unknown key-rate variant {variant!r}")
    if not 0.0 <= delta < 1.0:
        raise ValueError(f"delta must be in [0, 1), got {delta}")
    e_eff = e / (1.0 - delta)
    if e_eff > 1.0:
        raise ValueError(f"e/(1-delta) = {e_eff:.4g} exceeds 1; no meaningful bound")
    h_eff = hd_entropy(e_eff, d)
    h_e = hd_entropy(e, d)
    printed = (1.0 - delta) * (1.0 - h_eff) - f_ec * h_e
    consistent = (1.0 - delta) * (math.log2(d) - h_eff) - f_ec * h_e
    per_signal = consistent if variant == "table_consistent" else printed
    return KeyRateResult(
        variant=variant,
        r_delta=q_mu * per_signal,
        per_signal=per_signal,
        per_signal_as_printed=printed,
        per_signal_table_consistent=consistent,
        secure=per_signal > 0.0,
    )


@dataclass(frozen=True)
class QberResult:
    """Sifted error rate with optional count-propagated uncertainty."""

    e: float
    sigma: Optional[float]
    excluded_rows: tuple[str, ...] = ()


def qber_from_matrix(m: ScatteringMatrix, counts: Optional[CountsTable] = None,
                     weighting: str = "uniform") -> QberResult:
    """QBER = 1 - weighted mean of row-normalized matched-basis diagonals.

    Rows whose matched-basis sum vanishes are excluded with a warning (a
    fully blocked channel contributes no sifted events). Row weighting is
    uniform by default (both bases count equally); "counts" weights rows by
    their sifted totals and requires a counts table. When a counts table is
    supplied the statistical uncertainty is propagated from it.
    """
    if weighting not in ("uniform", "counts"):
        raise ValueError(f"weighting must be uniform or counts, got {weighting!r}")
    if weighting == "counts" and counts is None:
        raise ValueError("counts-weighted QBER needs a counts table")
    fracs = []
    weights = []
    excluded = []
    for i in range(8):
        b = m.basis_slice(i)
        s = m.raw[i, b].sum()
        if s <= 0:
            excluded.append(m.labels[i])
            continue
        fracs.append(m.raw[i, i] / s)
        weights.append(counts.counts[i, b].sum() if weighting == "counts" else 1.0)
    if excluded:
        warnings.warn(
            f"rows with no matched-basis signal excluded from QBER: {excluded}",
            stacklevel=2,
        )
    if not fracs or sum(weights) == 0:
        raise ValueError("no sifted signal in any row; QBER undefined")
    e = 1.0 - float(np.average(fracs, weights=weights))
    sigma = None
    if counts is not None:
        _, sigma = counts.empirical_qber()
    return QberResult(e=e, sigma=sigma, excluded_rows=tuple(excluded))


PSI00 = 0  # index of the radially structured reference state


@dataclass(frozen=True)
class SecurityReport:
    """Bundle of security figures for one scenario."""

    scenario: str
    family: str
    dimension: int
    qber: float
    qber_sigma: Optional[float]
    mutual_information_bits: float
    delta: float
    key_rate: KeyRateResult
    normalized_counts: Optional[float]
    f_ec: float
    mu: Optional[float]
    q_mu: Optional[float]
    notes: tuple[str, ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "family": self.family,
            "dimension": self.dimension,
            "qber": self.qber,
            "qber_sigma": self.qber_sigma,
            "mutual_information_bits": self.mutual_information_bits,
            "delta": self.delta,
            "key_rate": self.key_rate.to_json_dict(),
            "normalized_counts": self.normalized_counts,
            "f_ec": self.f_ec,
            "mu": self.mu,
            "q_mu": self.q_mu,
            "notes": list(self.notes),
        }


def security_report(matrix: ScatteringMatrix, *,
                    stats: Optional[PhotonStatistics] = None,
                    delta: Optional[float] = None,
                    q_mu: Optional[float] = None,
                    reference: Optional[ScatteringMatrix] = None,
                    counts: Optional[CountsTable] = None,
                    d: int = 4, f_ec: float = 1.2,
                    variant: str = "table_consistent",
                    scenario: str = "") -> SecurityReport:
    """Assemble QBER, I_AB, Delta, key rate and normalized counts.

    Delta comes either from source statistics or as a direct entry (exactly
    one of stats/delta; q_mu may accompany a direct delta). Normalized counts
    compare the psi00 -> psi00 raw detection probability against the
    free-space reference matrix; without a reference the field is absent.
    """
    if (stats is None) == (delta is None):
        raise ValueError("provide exactly one of stats or delta")
    if delta is None:
        delta = multiphoton_fraction(stats)
    if q_mu is None:
        q_mu = stats.q_mu if stats is not None else 1.0
    qber = qber_from_matrix(matrix, counts)
    i_ab = mutual_information(qber.e, d)
    rate = key_rate(qber.e, delta, d=d, f_ec=f_ec, q_mu=q_mu, variant=variant)
    notes = list(matrix.warnings)
    nc = None
    if reference is not None:
        ref_val = reference.raw[PSI00, PSI00]
        if ref_val > 0:
            nc = float(matrix.raw[PSI00, PSI00] / ref_val)
        else:
            notes.append("reference psi00 probability is zero; NC unavailable")
    else:
        notes.append("no free-space reference supplied; NC not computed")
    return SecurityReport(
        scenario=scenario or matrix.scenario,
        family=matrix.family,
        dimension=d,
        qber=qber.e,
        qber_sigma=qber.sigma,
        mutual_information_bits=i_ab,
        delta=delta,
        key_rate=rate,
        normalized_counts=nc,
        f_ec=f_ec,
        mu=(stats.mu if stats is not None else None),
        q_mu=q_mu,
        notes=tuple(notes),
    )
