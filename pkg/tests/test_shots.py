import numpy as np
import pytest
from scipy.stats import chisquare

from adaptgf.pauli import PauliWord
from adaptgf.shots import (
    Histogram,
    NoiseModel,
    apply_readout_noise,
    noisy_distribution,
    overlap_probabilities,
    sample,
    task_seed,
)
from adaptgf.state import Ansatz, apply_ansatz, apply_pauli

from conftest import random_state

W = PauliWord.from_symbols


def random_instance(rng, n=2):
    letters = "IXYZ"
    psi = random_state(rng, n)
    p1 = W("".join(rng.choice(list(letters), n)))
    p2 = W("".join(rng.choice(list(letters), n)))
    gens = [W("".join(rng.choice(list(letters), n))) for _ in range(3)]
    return psi, p1, Ansatz(gens, list(rng.uniform(-np.pi, np.pi, 3))), p2


def test_identity_circuit():
    psi = np.array([1, 0, 0, 0], dtype=complex)
    d = overlap_probabilities(psi, None, None, None)
    assert d.p0 == pytest.approx(1) and d.p1 == pytest.approx(0)


def test_zero_overlap_is_fair():
    psi = np.array([1, 0], dtype=complex)
    d = overlap_probabilities(psi, W("X"), None, None)
    assert d.p0 == pytest.approx(0.5) and d.p1 == pytest.approx(0.5)


def test_real_and_imag_parts(rng):
    for _ in range(50):
        psi, p1, ans, p2 = random_instance(rng)
        target = np.vdot(psi, apply_pauli(p2, apply_ansatz(ans, apply_pauli(p1, psi))))
        re = overlap_probabilities(psi, p1, ans, p2, "real")
        im = overlap_probabilities(psi, p1, ans, p2, "imag")
        assert abs(re.p0 - re.p1 - target.real) < 1e-12
        assert abs(im.p0 - im.p1 - target.imag) < 1e-12
        assert re.joint.sum() == pytest.approx(1.0)


def test_bitstring_layout():
    # ancilla is the leading character; system qubit 0 is the last character
    psi = np.array([0, 1, 0, 0], dtype=complex)  # qubit 0 set
    h = sample(overlap_probabilities(psi, None, None, None), 10, seed=1)
    assert h.counts == {"001": 10}
    assert h.overlap_estimate() == 1.0


def test_deterministic_distribution_gives_single_key():
    h = sample(np.array([0, 0, 1.0, 0]), 1000, seed=0, n_bits=2)
    assert h.counts == {"10": 1000} and h.shots == 1000


def test_fair_ancilla_within_three_sigma():
    psi = np.array([1, 0], dtype=complex)
    d = overlap_probabilities(psi, W("X"), None, None)
    h = sample(d, 100_000, seed=11)
    assert abs(h.p0() - 0.5) <= 3 * 0.5 / np.sqrt(1e5)


def test_sampling_is_reproducible():
    probs = np.full(8, 1 / 8)
    a = sample(probs, 1000, seed=task_seed(5, 1, 2))
    b = sample(probs, 1000, seed=task_seed(5, 1, 2))
    c = sample(probs, 1000, seed=task_seed(5, 1, 3))
    assert a.counts == b.counts and a.counts != c.counts


def test_estimator_error_shrinks_with_shots(rng):
    psi, p1, ans, p2 = random_instance(rng)
    d = overlap_probabilities(psi, p1, ans, p2)
    rms = []
    for shots in (1_000, 10_000, 100_000):
        errs = [sample(d, shots, seed=s).p0() - d.p0 for s in range(20)]
        rms.append(np.sqrt(np.mean(np.square(errs))))
    for a, b in zip(rms, rms[1:]):
        assert 0.5 * np.sqrt(10) <= a / b <= 2 * np.sqrt(10)


def test_zero_noise_is_identity():
    h = Histogram({"01": 30, "10": 70}, 2)
    assert apply_readout_noise(h, NoiseModel(), seed=0).counts == h.counts


def test_heavy_noise_flattens():
    h = Histogram({"000": 100_000}, 3)
    noisy = apply_readout_noise(h, NoiseModel(0.4999999, 0.4999999), seed=3)
    assert chisquare(noisy.as_array()).pvalue > 1e-3


def test_noisy_distribution_matches_shot_flipping():
    probs = np.array([0.5, 0.1, 0.0, 0.4])
    model = NoiseModel(0.1, 0.2)
    analytic = noisy_distribution(probs, 2, model)
    # bit 0 (least significant): 0 -> 1 with 0.1, 1 -> 0 with 0.2
    assert analytic.sum() == pytest.approx(1)
    h = sample(probs, 200_000, seed=4, n_bits=2)
    emp = apply_readout_noise(h, model, seed=5).as_array() / 200_000
    assert np.abs(emp - analytic).max() < 5e-3


def test_noise_validation():
    with pytest.raises(ValueError):
        NoiseModel(0.6, 0.0)


def test_histogram_invariants_and_json(tmp_path):
    with pytest.raises(ValueError):
        Histogram({"01": 1, "1": 2}, 2)
    h = Histogram({"01": 3, "11": 5}, 2, meta={"seed": 1})
    assert h.shots == 8 and h.ancilla_counts() == (3, 5)
    h.save(tmp_path / "h.json")
    back = Histogram.load(tmp_path / "h.json")
    assert back.counts == h.counts and back.meta == h.meta and back.raw_shots == 8
    with pytest.raises(ValueError):
        Histogram({}, 2, empty=True).p0()
