"""Backflowing states and probability-current evaluation.

The current J at ring angle theta0 is evaluated four ways: exactly from
the momentum coefficients (phase-weighted double sum), from the closed
form for the built-in backflowing family, by shot-based simulation of the
measurement circuits, and by recombining externally measured outcome data.
The word-expansion estimator is specific to theta0 = 0; nonzero angles are
available through the exact path only.

All estimators assemble J as (identity_weight + sum coeff * <V>) / 4pi
from their own per-term records, and every report round-trips: feeding
``report.to_dict()`` back into ``ingest_measurements`` reproduces the
same estimate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuits import (
    MeasurementSetting,
    backflow_prep_angles,
    group_terms,
    measurement_circuit,
    prepare_backflow_circuit,
)
from .engine import (
    apply_circuit,
    init_amplitudes,
    init_basis,
    sample,
    z_probabilities,
)
from .pauli import PauliString, WeightedPauliSum, current_decomposition, index_masks

FOUR_PI = 4.0 * math.pi

#: Shots per measurement setting used when nothing else is requested.
DEFAULT_SHOTS = 8000

_RNG_NAME = "numpy-default_rng-PCG64"


@dataclass(frozen=True, slots=True)
class BackflowCoefficients:
    """Real momentum coefficients a_m of the built-in backflowing family."""

    n_qubits: int
    a: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.a, dtype=np.float64)
        if arr.shape != (1 << self.n_qubits,):
            raise ValueError("coefficient count must be 2^N")
        object.__setattr__(self, "a", arr)


@dataclass(frozen=True, slots=True)
class TermRecord:
    """One estimated word expectation; ``setting`` is None for supplied values."""

    word: str
    coeff: float
    setting: str | None
    expectation: float
    std_error: float | None

    def to_dict(self) -> dict:
        return {
            "word": self.word,
            "coeff": self.coeff,
            "setting": self.setting,
            "expectation": self.expectation,
            "std_error": self.std_error,
        }


@dataclass(frozen=True, slots=True)
class SettingRecord:
    """Outcome data gathered under one measurement setting."""

    basis_word: str
    probabilities: dict[str, float]
    counts: dict[str, int] | None
    seed_entropy: list[int] | None
    terms: tuple[str, ...]

    def to_dict(self) -> dict:
        d: dict = {
            "basis_word": self.basis_word,
            "probabilities": dict(sorted(self.probabilities.items())),
            "terms": list(self.terms),
        }
        if self.counts is not None:
            d["counts"] = dict(sorted(self.counts.items()))
        if self.seed_entropy is not None:
            d["seed_entropy"] = list(self.seed_entropy)
        return d


@dataclass(frozen=True, slots=True)
class ExperimentReport:
    """Full record of one current evaluation.

    ``j_estimate`` always equals
    (identity_weight + sum of coeff * expectation over term_records) / 4pi;
    reports without estimator records fold the exact value into
    ``identity_weight`` so the identity still holds.
    """

    n_qubits: int
    mode: str
    shots_per_setting: int | None
    seed: int | None
    grouped: bool | None
    readout_flip: float
    rng: str | None
    theta0: float
    identity_weight: float
    term_records: tuple[TermRecord, ...]
    setting_records: tuple[SettingRecord, ...]
    prep: dict | None
    j_estimate: float
    j_std_error: float | None
    j_exact: float
    j_closed_form: float
    relative_error: float

    def to_dict(self) -> dict:
        return {
            "n": self.n_qubits,
            "mode": self.mode,
            "shots_per_setting": self.shots_per_setting,
            "seed": self.seed,
            "grouped": self.grouped,
            "readout_flip": self.readout_flip,
            "rng": self.rng,
            "theta0": self.theta0,
            "identity_weight": self.identity_weight,
            "terms": [r.to_dict() for r in self.term_records],
            "settings": [s.to_dict() for s in self.setting_records],
            "prep": self.prep,
            "j_estimate": self.j_estimate,
            "j_std_error": self.j_std_error,
            "j_exact": self.j_exact,
            "j_closed_form": self.j_closed_form,
            "relative_error": self.relative_error,
        }


def backflow_coefficients(n_qubits: int) -> BackflowCoefficients:
    """Affine-in-m coefficient family with negative current for every N >= 1."""
    if n_qubits < 1:
        raise ValueError("need at least one qubit")
    dim = 1 << n_qubits
    norm_sq = ((dim << 1) + 1) * (dim - 1) * (dim >> 1)
    m = np.arange(dim, dtype=np.float64)
    a = (3.0 * m - 2.0 * (dim - 1)) / math.sqrt(norm_sq)
    return BackflowCoefficients(n_qubits, a)


def exact_current(coeffs, theta0: float = 0.0) -> float:
    """Probability current at ring angle theta0 for momentum coefficients.

    Evaluates (1/2pi) Re[ conj(S0) S1 ] with S0 = sum c_m e^(i m theta0)
    and S1 = sum m c_m e^(i m theta0); at theta0 = 0 this is the familiar
    (1/4pi) sum over conj(c_m) (m + n) c_n.
    """
    c = np.asarray(getattr(coeffs, "a", coeffs), dtype=np.complex128)
    if c.ndim != 1 or c.size < 2 or c.size & (c.size - 1):
        raise ValueError("coefficient array length must be 2^N with N >= 1")
    nrm = np.linalg.norm(c)
    if abs(nrm - 1.0) > 1e-9:
        raise ValueError(f"coefficients not normalized (norm {nrm!r})")
    # extended precision: the sums cancel heavily for large registers
    b = c.astype(np.clongdouble)
    m = np.arange(c.size, dtype=np.longdouble)
    if theta0 != 0.0:
        b = b * np.exp(1j * np.clongdouble(theta0) * m)
    s0 = b.sum()
    s1 = (m * b).sum()
    return float((np.conj(s0) * s1).real / (2.0 * np.longdouble(math.pi)))


def closed_form_current(n_qubits: int) -> float:
    """Current of the built-in backflowing family; strictly negative."""
    if n_qubits < 1:
        raise ValueError("need at least one qubit")
    dim = 1 << n_qubits
    return -(dim * (dim - 1)) / ((dim << 1) + 1) / FOUR_PI


def relative_error(j_obs: float, j_theory: float) -> float:
    """|j_obs - j_theory| / |j_theory|."""
    if j_theory == 0.0:
        raise ZeroDivisionError("relative error needs a nonzero reference")
    return abs(j_obs - j_theory) / abs(j_theory)


def _outcome_arrays(probs: dict[str, float]) -> tuple[np.ndarray, np.ndarray]:
    # fixed (sorted) outcome order so identical data reproduces identical floats
    items = sorted(probs.items())
    codes = np.array([int(bits, 2) for bits, _ in items], dtype=np.int64)
    values = np.array([p for _, p in items], dtype=np.float64)
    return codes, values


def _term_expectation(word: str, codes: np.ndarray, values: np.ndarray) -> float:
    mx, my, mz = index_masks(word)
    parity = np.bitwise_count(codes & (mx | my | mz)).astype(np.int64) & 1
    return float(np.dot((1.0 - 2.0 * parity), values))


def _measurement_plan(
    decomp: WeightedPauliSum, grouped: bool
) -> list[tuple[MeasurementSetting, list[PauliString]]]:
    if grouped:
        return list(group_terms(decomp).items())
    plan = []
    for term in decomp.terms:
        word = "".join("X" if ch == "X" else "Z" for ch in term.word)
        plan.append((MeasurementSetting(word), [term]))
    return plan


def _prepared_state(n_qubits: int, coeffs: BackflowCoefficients):
    if n_qubits <= 2:
        circ = prepare_backflow_circuit(n_qubits)
        state = apply_circuit(init_basis(n_qubits, 0), circ)
        prep = {
            "method": "rotation-synthesis",
            "angles": backflow_prep_angles(n_qubits),
            "rotation_rule": "RY(t)=[[cos t/2,-sin t/2],[sin t/2,cos t/2]]; "
            "controlled form applies RY(angle) to the target when the control is 1",
        }
    else:
        state = init_amplitudes(n_qubits, coeffs.a)
        prep = {"method": "amplitude-load"}
    return state, prep


def _finish_report(
    *,
    n_qubits,
    mode,
    shots_per_setting,
    seed,
    grouped,
    readout_flip,
    rng,
    theta0,
    identity_weight,
    term_records,
    setting_records,
    prep,
) -> ExperimentReport:
    weighted = identity_weight + math.fsum(
        r.coeff * r.expectation for r in term_records
    )
    j_estimate = weighted / FOUR_PI
    if term_records and all(r.std_error is not None for r in term_records):
        j_std = (
            math.sqrt(math.fsum((r.coeff * r.std_error) ** 2 for r in term_records))
            / FOUR_PI
        )
    else:
        j_std = None
    j_exact = exact_current(backflow_coefficients(n_qubits).a, 0.0)
    j_closed = closed_form_current(n_qubits)
    return ExperimentReport(
        n_qubits=n_qubits,
        mode=mode,
        shots_per_setting=shots_per_setting,
        seed=seed,
        grouped=grouped,
        readout_flip=readout_flip,
        rng=rng,
        theta0=theta0,
        identity_weight=identity_weight,
        term_records=tuple(term_records),
        setting_records=tuple(setting_records),
        prep=prep,
        j_estimate=j_estimate,
        j_std_error=j_std,
        j_exact=j_exact,
        j_closed_form=j_closed,
        relative_error=relative_error(j_estimate, j_closed),
    )


def run_simulation(
    n_qubits: int,
    shots_per_setting: int | None = DEFAULT_SHOTS,
    seed: int | None = None,
    grouped: bool = True,
    readout_flip: float = 0.0,
) -> ExperimentReport:
    """Estimate the current by simulating the measurement circuits.

    The backflowing state is synthesized from rotations for one or two
    qubits and loaded as amplitudes otherwise.  Each measurement setting
    samples ``shots_per_setting`` outcomes with its own generator, seeded
    from [seed, setting_index]; ``shots_per_setting=None`` replaces the
    samples with the exact outcome probabilities (the infinite-shot limit,
    reported as mode "exact").
    """
    if shots_per_setting is not None and shots_per_setting < 1:
        raise ValueError("need at least one shot per setting")
    decomp = current_decomposition(n_qubits)
    coeffs = backflow_coefficients(n_qubits)
    state, prep = _prepared_state(n_qubits, coeffs)
    plan = _measurement_plan(decomp, grouped)
    sampling = shots_per_setting is not None
    if sampling and seed is None:
        seed = int(np.random.SeedSequence().entropy) % (1 << 32)
    term_records: list[TermRecord] = []
    setting_records: list[SettingRecord] = []
    for k, (setting, terms) in enumerate(plan):
        rotated = apply_circuit(state, measurement_circuit(setting))
        if sampling:
            entropy = [seed, k]
            outcome = sample(
                rotated,
                shots_per_setting,
                seed=np.random.SeedSequence(entropy),
                readout_flip=readout_flip,
            )
            counts = outcome.counts
            probs = {bits: c / shots_per_setting for bits, c in counts.items()}
        else:
            entropy = None
            counts = None
            n = n_qubits
            probs = {
                format(i, f"0{n}b"): float(p)
                for i, p in enumerate(z_probabilities(rotated))
                if p > 0.0
            }
        codes, values = _outcome_arrays(probs)
        for term in terms:
            value = _term_expectation(term.word, codes, values)
            if sampling:
                std = math.sqrt(max(0.0, 1.0 - value * value) / shots_per_setting)
            else:
                std = None
            term_records.append(
                TermRecord(term.word, term.coeff, setting.basis_word, value, std)
            )
        setting_records.append(
            SettingRecord(
                setting.basis_word,
                dict(sorted(probs.items())),
                counts,
                entropy,
                tuple(t.word for t in terms),
            )
        )
    return _finish_report(
        n_qubits=n_qubits,
        mode="shots" if sampling else "exact",
        shots_per_setting=shots_per_setting,
        seed=seed if sampling else None,
        grouped=grouped,
        readout_flip=readout_flip,
        rng=_RNG_NAME if sampling else None,
        theta0=0.0,
        identity_weight=decomp.identity_weight,
        term_records=term_records,
        setting_records=setting_records,
        prep=prep,
    )


def run_exact(
    n_qubits: int, theta0: float = 0.0, grouped: bool = True
) -> ExperimentReport:
    """Exact current report; nonzero theta0 uses the double sum only."""
    if theta0 == 0.0:
        return run_simulation(n_qubits, shots_per_setting=None, grouped=grouped)
    coeffs = backflow_coefficients(n_qubits)
    j = exact_current(coeffs.a, theta0)
    return _finish_report(
        n_qubits=n_qubits,
        mode="exact",
        shots_per_setting=None,
        seed=None,
        grouped=None,
        readout_flip=0.0,
        rng=None,
        theta0=theta0,
        identity_weight=j * FOUR_PI,
        term_records=[],
        setting_records=[],
        prep=None,
    )


def _parse_setting_entry(entry: dict, n_qubits: int, position: int):
    basis = entry.get("basis_word")
    if not isinstance(basis, str) or len(basis) != n_qubits:
        raise ValueError(f"settings[{position}]: basis word must have {n_qubits} letters")
    setting = MeasurementSetting(basis)
    if "probabilities" in entry:
        probs = {str(b): float(p) for b, p in entry["probabilities"].items()}
        counts = None
    elif "counts" in entry:
        counts = {str(b): int(c) for b, c in entry["counts"].items()}
        total = sum(counts.values())
        if total <= 0:
            raise ValueError(f"settings[{position}]: empty counts")
        probs = {b: c / total for b, c in counts.items()}
    else:
        raise ValueError(f"settings[{position}]: needs probabilities or counts")
    for bits, p in probs.items():
        if len(bits) != n_qubits or set(bits) - {"0", "1"}:
            raise ValueError(f"settings[{position}]: bad outcome {bits!r}")
        if p < 0.0:
            raise ValueError(f"settings[{position}]: negative probability")
    if abs(math.fsum(probs.values()) - 1.0) > 1e-6:
        raise ValueError(f"settings[{position}]: probabilities do not sum to 1")
    return setting, probs, counts, entry.get("terms")


def ingest_measurements(n_qubits: int | None, data: dict) -> ExperimentReport:
    """Recombine externally measured data into a current estimate.

    ``data`` maps "n" plus either ``settings`` (a list of
    {basis_word, probabilities|counts[, terms]} entries) or
    ``expectations`` (a list of {word, value}).  Without explicit ``terms``
    lists, every expansion term is read from the first setting that covers
    it, in file order.  No simulation happens here: the output is exact
    arithmetic on the supplied numbers.
    """
    if not isinstance(data, dict):
        raise ValueError("measured data must be a mapping")
    n_field = data.get("n")
    if n_qubits is None:
        if n_field is None:
            raise ValueError("qubit count missing (no 'n' key and none supplied)")
        n_qubits = int(n_field)
    elif n_field is not None and int(n_field) != n_qubits:
        raise ValueError(f"data is for n={n_field}, not n={n_qubits}")
    if n_qubits < 1:
        raise ValueError("need at least one qubit")
    decomp = current_decomposition(n_qubits)

    if "expectations" in data:
        supplied = {}
        for entry in data["expectations"]:
            supplied[str(entry["word"])] = float(entry["value"])
        expected = {t.word for t in decomp.terms}
        if set(supplied) != expected:
            raise ValueError(
                "expectations must cover exactly the expansion terms; "
                f"missing {sorted(expected - set(supplied))[:4]}, "
                f"unknown {sorted(set(supplied) - expected)[:4]}"
            )
        term_records = [
            TermRecord(t.word, t.coeff, None, supplied[t.word], None)
            for t in decomp.terms
        ]
        setting_records: list[SettingRecord] = []
    elif "settings" in data:
        entries = data["settings"]
        if not entries:
            raise ValueError("settings list is empty")
        parsed = [
            _parse_setting_entry(entry, n_qubits, i) for i, entry in enumerate(entries)
        ]
        explicit = [p[3] is not None for p in parsed]
        if any(explicit) and not all(explicit):
            raise ValueError("either every setting lists its terms or none does")
        known = {t.word: t for t in decomp.terms}
        assignment: dict[str, int] = {}
        if all(explicit):
            for i, (setting, _, _, words) in enumerate(parsed):
                for word in words:
                    if word not in known:
                        raise ValueError(f"{word!r} is not an expansion term")
                    if word in assignment:
                        raise ValueError(f"term {word} assigned twice")
                    if not setting.covers(word):
                        raise ValueError(
                            f"term {word} not measurable under {setting.basis_word}"
                        )
                    assignment[word] = i
        else:
            for term in decomp.terms:
                for i, (setting, _, _, _) in enumerate(parsed):
                    if setting.covers(term.word):
                        assignment[term.word] = i
                        break
        uncovered = [t.word for t in decomp.terms if t.word not in assignment]
        if uncovered:
            raise ValueError(f"no setting covers terms {uncovered[:4]}")
        arrays = [_outcome_arrays(probs) for _, probs, _, _ in parsed]
        term_records = []
        for term in decomp.terms:
            i = assignment[term.word]
            value = _term_expectation(term.word, *arrays[i])
            term_records.append(
                TermRecord(term.word, term.coeff, parsed[i][0].basis_word, value, None)
            )
        setting_records = [
            SettingRecord(
                setting.basis_word,
                dict(sorted(probs.items())),
                counts,
                None,
                tuple(t.word for t in decomp.terms if assignment[t.word] == i),
            )
            for i, (setting, probs, counts, _) in enumerate(parsed)
        ]
    else:
        raise ValueError("data carries neither 'settings' nor 'expectations'")

    return _finish_report(
        n_qubits=n_qubits,
        mode="ingest",
        shots_per_setting=None,
        seed=None,
        grouped=None,
        readout_flip=0.0,
        rng=None,
        theta0=0.0,
        identity_weight=decomp.identity_weight,
        term_records=term_records,
        setting_records=setting_records,
        prep=None,
    )
