"""End-to-end prepare / transmit / measure pipeline.

A heralded, horizontally polarized photon with the post-selected radial
profile enters the preparation train, crosses the obstructed channel, is
demodulated by the receiver's wave-plate station (placed right after the
obstacle), travels the decoding leg L, and is projected on the detection
plane. Two detection models are available:

ideal
    Perfect modal projector onto the labelled state built from the heralded
    profile (hologram + fiber treated as one ideal filter at the detection
    plane).
cascade
    Explicit decomposition of the receiver: adjoint wave-plate train at the
    station, free propagation over L, binary-Bessel hologram multiply, and
    overlap with the back-projected fiber Gaussian of waist smf_waist. This
    is the model that resolves self-healing, since the fiber acceptance is
    narrower than the source envelope.

Both reduce to a single projection at the station plane against an
effective detection state, which is how they are evaluated.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .analysis import boundary_power_fraction
from .fields import (
    PolarizedField,
    ScalarField,
    TransverseGrid,
    horizontally_polarized,
    inner_product,
)
from .jones import ALL_LABELS, MubLabel, prepare_state
from .modes import ModeFamily, ModeSpec, binary_bessel_hologram, evaluate_mode
from .propagation import (
    BandLimitWarning,
    ChannelSpec,
    back_propagate,
    back_propagate_scalar,
    transmit_to_station,
)

BOUNDARY_POWER_TOL = 1e-6


class DetectionKind(Enum):
    IDEAL = "ideal"
    CASCADE = "cascade"


@dataclass(frozen=True)
class DetectionModel:
    """Receiver model: ideal modal projection or hologram + fiber cascade."""

    kind: DetectionKind = DetectionKind.IDEAL
    smf_waist: float | None = None
    noise_floor: float = 0.0

    def __post_init__(self):
        if self.kind is DetectionKind.CASCADE:
            if self.smf_waist is None or not self.smf_waist > 0:
                raise ValueError("cascade detection requires a positive smf_waist")
        if self.noise_floor < 0:
            raise ValueError("noise_floor must be >= 0")


@dataclass(frozen=True)
class SpdcConfig:
    """Down-conversion source: heralding projection mode plus the pump waist."""

    heralding: ModeSpec  # idler projection (ell = 0); sets the heralded profile
    pump_waist: float

    def __post_init__(self):
        if self.heralding.ell != 0:
            raise ValueError("heralding projection must have ell = 0")
        if not self.pump_waist > 0:
            raise ValueError("pump_waist must be positive")


def heralded_profile(source: ModeSpec, grid: TransverseGrid) -> ScalarField:
    """Unit-power ell = 0 radial profile of the given mode family."""
    spec = ModeSpec(
        family=source.family,
        ell=0,
        w0=source.w0,
        wavelength=source.wavelength,
        k_r=source.k_r if source.family is ModeFamily.BG else 0.0,
    )
    return evaluate_mode(spec, grid)


def heralded_input(source: "ModeSpec | SpdcConfig", grid: TransverseGrid) -> PolarizedField:
    """Heralded photon state: the ell = 0 profile, horizontally polarized.

    Accepts either the working mode spec or an SpdcConfig (whose heralding
    projection defines the post-selected radial profile).
    """
    if isinstance(source, SpdcConfig):
        source = source.heralding
    return horizontally_polarized(heralded_profile(source, grid), source.wavelength)


def spdc_overlap(signal: ModeSpec, idler: ModeSpec, pump_waist: float,
                 grid: TransverseGrid) -> complex:
    """Two-photon detection amplitude c = Int m_s* m_i* m_p d2x.

    Mode functions are the unit-normalized z = 0 transverse modes (radial
    profile times exp(i ell phi)); the pump is a unit-power Gaussian of the
    given waist. A Gaussian pump enforces the azimuthal selection rule
    ell_s + ell_i = 0.
    """
    m_s = evaluate_mode(signal, grid).samples
    m_i = evaluate_mode(idler, grid).samples
    pump = np.exp(-(grid.r / pump_waist) ** 2)
    pump = pump / np.sqrt(np.sum(np.abs(pump) ** 2) * grid.pixel_area)
    acc = np.sum(np.conj(m_s) * np.conj(m_i) * pump) * grid.pixel_area
    return complex(acc)


def measure_projection(f: PolarizedField, label: MubLabel, detection: ModeSpec,
                       ell: int | None = None) -> complex:
    """Ideal modal projection <b_label|f> at the plane where f lives.

    The reference state b_label is the labelled preparation applied to the
    ell = 0 heralded profile of `detection`.
    """
    if ell is None:
        ell = abs(detection.ell) or 1
    ref = prepare_state(label, heralded_input(detection, f.grid), ell)
    return inner_product(ref, f)


# ---------------------------------------------------------------------------
# effective detection states at the demodulation station

def _ideal_detection_states(source: ModeSpec, grid: TransverseGrid, ell: int,
                            decoding_distance: float) -> list[PolarizedField]:
    base = heralded_input(source, grid)
    states = []
    for label in ALL_LABELS:
        b = prepare_state(label, base, ell)
        states.append(back_propagate(b, decoding_distance) if decoding_distance > 0 else b)
    return states


def _cascade_detection_states(source: ModeSpec, grid: TransverseGrid, ell: int,
                              decoding_distance: float, smf_waist: float) -> list[PolarizedField]:
    g = np.exp(-(grid.r / smf_waist) ** 2)
    if source.family is ModeFamily.BG and source.k_r > 0:
        holo = binary_bessel_hologram(0, source.k_r, grid).samples
        det_scalar = ScalarField(grid, holo * g).normalized()
    else:
        det_scalar = ScalarField(grid, g.astype(complex)).normalized()
    if decoding_distance > 0:
        det_scalar = back_propagate_scalar(det_scalar, source.wavelength, decoding_distance)
    base = horizontally_polarized(det_scalar, source.wavelength)
    return [prepare_state(label, base, ell) for label in ALL_LABELS]


def detection_states(source: ModeSpec, grid: TransverseGrid, ell: int,
                     decoding_distance: float, detection: DetectionModel) -> list[PolarizedField]:
    """Effective projection states at the station plane for all 8 labels.

    Projecting the station-plane field on these equals running the physical
    receiver (adjoint train, decoding propagation, hologram, fiber overlap).
    """
    if detection.kind is DetectionKind.CASCADE:
        return _cascade_detection_states(source, grid, ell, decoding_distance,
                                         detection.smf_waist)
    return _ideal_detection_states(source, grid, ell, decoding_distance)


# ---------------------------------------------------------------------------
# scattering matrix

LABEL_STRINGS: tuple[str, ...] = tuple(str(l) for l in ALL_LABELS)


@dataclass(frozen=True)
class ScatteringMatrix:
    """8x8 detection probabilities over {psi00..psi11, phi00..phi11}.

    raw[i, j] is the probability of detecting prepared state i in projection
    j (noise floor included); transmission[i] is the power reaching the
    detection plane for prepared state i (unit input).
    """

    labels: tuple[str, ...]
    raw: np.ndarray
    transmission: np.ndarray
    noise_floor: float = 0.0
    family: str = ""
    scenario: str = ""
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        raw = np.asarray(self.raw, dtype=float).copy()
        raw.setflags(write=False)
        object.__setattr__(self, "raw", raw)
        tr = np.asarray(self.transmission, dtype=float).copy()
        tr.setflags(write=False)
        object.__setattr__(self, "transmission", tr)

    def basis_slice(self, i: int) -> slice:
        return slice(0, 4) if i < 4 else slice(4, 8)

    def row_normalized(self) -> np.ndarray:
        """Rows scaled by the matched-basis sum (detection-conditional)."""
        out = np.zeros_like(self.raw)
        for i in range(8):
            s = self.raw[i, self.basis_slice(i)].sum()
            if s > 0:
                out[i] = self.raw[i] / s
        return out

    def matched_diagonal(self) -> np.ndarray:
        rn = self.row_normalized()
        return np.diag(rn)

    def to_json_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "raw": self.raw.tolist(),
            "row_normalized": self.row_normalized().tolist(),
            "transmission": self.transmission.tolist(),
            "noise_floor": self.noise_floor,
            "family": self.family,
            "scenario": self.scenario,
            "warnings": list(self.warnings),
        }

    def to_csv(self) -> str:
        lines = ["prepared\\measured," + ",".join(self.labels)]
        for i, row in enumerate(self.raw):
            lines.append(self.labels[i] + "," + ",".join(f"{v:.10g}" for v in row))
        return "\n".join(lines) + "\n"


def scattering_matrix(channel: ChannelSpec, source: ModeSpec,
                      detection: DetectionModel, grid: TransverseGrid,
                      scenario: str = "") -> ScatteringMatrix:
    """Simulate all 8 prepared states through the channel and project them.

    Preparation and projection both use the source's |ell|; the obstacles and
    decoding leg are taken from the channel. Band-limit and grid-boundary
    guard violations are attached as warnings on the result.
    """
    ell = abs(source.ell) or 1
    base = heralded_input(source, grid)
    dets = detection_states(source, grid, ell, channel.decoding_distance, detection)
    raw = np.zeros((8, 8))
    transmission = np.zeros(8)
    notes: list[str] = []
    for i, label in enumerate(ALL_LABELS):
        a = prepare_state(label, base, ell)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", BandLimitWarning)
            f = transmit_to_station(a, channel)
        for w in caught:
            notes.append(f"{label}: {w.message}")
        transmission[i] = f.power()
        edge = boundary_power_fraction(f)
        if edge > BOUNDARY_POWER_TOL:
            notes.append(f"{label}: boundary power fraction {edge:.2e}")
        for j in range(8):
            raw[i, j] = abs(inner_product(dets[j], f)) ** 2
    raw += detection.noise_floor
    return ScatteringMatrix(
        labels=LABEL_STRINGS,
        raw=raw,
        transmission=transmission,
        noise_floor=detection.noise_floor,
        family=source.family.value,
        scenario=scenario,
        warnings=tuple(notes),
    )


# ---------------------------------------------------------------------------
# finite statistics

@dataclass(frozen=True)
class CountRates:
    """Source and sifting rates for the counting model."""

    pairs_per_second: float
    integration_time: float
    basis_probability: float = 0.5  # probability of choosing the vector basis

    def __post_init__(self):
        if self.pairs_per_second < 0 or self.integration_time < 0:
            raise ValueError("rates must be non-negative")
        if not 0 < self.basis_probability < 1:
            raise ValueError("basis_probability must be in (0, 1)")

    @property
    def total_events(self) -> float:
        return self.pairs_per_second * self.integration_time


@dataclass(frozen=True)
class CountsTable:
    """Poisson-sampled event counts per (prepared, measured) cell."""

    labels: tuple[str, ...]
    counts: np.ndarray
    expected: np.ndarray
    seed: int
    total_events: float

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64).copy()
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)
        e = np.asarray(self.expected, dtype=float).copy()
        e.setflags(write=False)
        object.__setattr__(self, "expected", e)

    def empirical_qber(self) -> tuple[float, float]:
        """Sifted-error estimate and its standard error from matched blocks."""
        fracs = []
        variances = []
        for i in range(8):
            b = slice(0, 4) if i < 4 else slice(4, 8)
            row_total = self.counts[i, b].sum()
            if row_total == 0:
                continue
            p = self.counts[i, i] / row_total
            fracs.append(p)
            variances.append(max(p * (1.0 - p), 1.0 / row_total) / row_total)
        if not fracs:
            raise ValueError("no sifted events in any matched row")
        e = 1.0 - float(np.mean(fracs))
        sigma = float(np.sqrt(np.sum(variances)) / len(fracs))
        return e, sigma

    def summary(self) -> dict:
        return {
            "mean_counts_per_cell": float(self.counts.mean()),
            "stderr_counts_per_cell": float(self.counts.std(ddof=1) / np.sqrt(self.counts.size)),
            "total_counts": int(self.counts.sum()),
        }

    def to_csv(self) -> str:
        lines = ["prepared\\measured," + ",".join(self.labels)]
        for i, row in enumerate(self.counts):
            lines.append(self.labels[i] + "," + ",".join(str(int(v)) for v in row))
        return "\n".join(lines) + "\n"


def simulate_counts(matrix: ScatteringMatrix, rates: CountRates, seed: int) -> CountsTable:
    """Draw independent Poisson counts for each of the 64 cells.

    Cell (i, j) has mean N * P(prepare i) * P(project j) * raw[i, j] with
    uniform state choice inside each basis. Per-cell generators are spawned
    from one seed, so results are identical regardless of evaluation order.
    """
    n_events = rates.total_events
    p_basis = np.array([rates.basis_probability] * 4 + [1.0 - rates.basis_probability] * 4)
    p_choice = p_basis / 4.0
    mean = n_events * np.outer(p_choice, p_choice) * matrix.raw
    streams = np.random.SeedSequence(seed).spawn(64)
    counts = np.zeros((8, 8), dtype=np.int64)
    for idx, ss in enumerate(streams):
        i, j = divmod(idx, 8)
        counts[i, j] = np.random.default_rng(ss).poisson(mean[i, j])
    return CountsTable(
        labels=matrix.labels,
        counts=counts,
        expected=mean,
        seed=seed,
        total_events=n_events,
    )
