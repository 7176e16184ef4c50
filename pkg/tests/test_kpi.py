import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from goiot import kpi
from goiot.errors import MismatchedLengths

FRAMES = 43200
RPI5 = kpi.HardwareProfile("rpi5", 2.4e9, 31)
XEON_8480C = kpi.HardwareProfile("xeon-8480c", 2.0e9, 2329)
FLAT = kpi.DetectorProfile((0.0, 1.0), (1.0, 1.0), (0.0, 0.0))


def model(gflop=195.9, payload=1.2288e6):
    return kpi.ModelConfig("m", gflop, payload, FLAT)


# energy_processing ----------------------------------------------------------------

def test_processing_rpi_640x():
    e = kpi.energy_processing(RPI5, model())
    assert e == pytest.approx(95.8325, rel=1e-5)
    assert e * FRAMES / 1e3 == pytest.approx(4120.934, rel=0.02)


def test_processing_cloud_640x():
    e = kpi.energy_processing(XEON_8480C, model())
    assert e == pytest.approx(0.738179, rel=1e-5)
    assert e * FRAMES / 1e3 == pytest.approx(31.752, rel=0.01)


def test_processing_zero_work():
    assert kpi.energy_processing(RPI5, model(gflop=0.0)) == 0.0


@given(st.floats(1e8, 5e9), st.floats(1, 1e4), st.floats(0.1, 500))
def test_processing_cubic_in_frequency(f, gflops, work):
    # doubling f with gflops scaled alongside keeps tau fixed
    a = kpi.energy_processing(kpi.HardwareProfile("a", f, gflops), model(gflop=work))
    b = kpi.energy_processing(kpi.HardwareProfile("b", 2 * f, gflops), model(gflop=work))
    assert b / a == pytest.approx(8.0, rel=1e-12)


# transmission / AP / transport / UPF ------------------------------------------------

def test_transmission_640(radio):
    e = kpi.energy_transmission(model(), radio)
    assert e == pytest.approx(0.0393216, rel=1e-9)
    assert e * FRAMES == pytest.approx(1698.69, rel=1e-5)


def test_transmission_320(radio):
    assert kpi.energy_transmission(model(payload=307e3), radio) == pytest.approx(9.824e-3, rel=1e-9)


def test_transmission_zero(radio):
    assert kpi.energy_transmission(model(payload=0), radio) == 0.0


def test_ap_calibrated(radio):
    recv, proc = kpi.energy_ap(model(), radio)
    # 9.8304e6 bits / 1 Gbps * (437.4 + 390) W * 1.27
    assert recv + proc == pytest.approx(10.3297647, rel=1e-6)
    assert (recv + proc) * FRAMES / 1e3 == pytest.approx(446.367, rel=0.01)


def test_ap_zero(radio):
    assert kpi.energy_ap(model(payload=0), radio) == (0.0, 0.0)


def test_ap_overhead_linear(radio):
    base = sum(kpi.energy_ap(model(), radio))
    no_overhead = kpi.RadioConfig(radio.alpha, radio.p_t, radio.p_ap_recv, radio.p_ap_proc,
                                  radio.p_pa, 0.0, radio.ap_capacity)
    assert sum(kpi.energy_ap(model(), no_overhead)) == pytest.approx(base / 1.27, rel=1e-12)


class _L:
    def __init__(self, rate=100e9, p_nic=1.0, p_tr=110.9):
        self.rate, self.p_nic, self.p_tr = rate, p_nic, p_tr


def test_transport_one_link():
    e = kpi.energy_transport(model(), [_L()])
    assert e == pytest.approx(9.8304e6 / 100e9 * 2 * 111.9, rel=1e-12)
    assert e == pytest.approx(0.02199, rel=1e-3)


def test_transport_no_links():
    assert kpi.energy_transport(model(), []) == 0.0


def test_transport_remote_calibration():
    e = kpi.energy_transport(model(), [_L()] * 19)
    assert e * FRAMES / 1e3 == pytest.approx(17.976, rel=0.02)


def test_upf_two_at_one_tbps():
    u = kpi.UpfConfig(upf_rate=1e12)
    e = kpi.energy_upf(model(), u, 2)
    assert e == pytest.approx(2 * 9.8304e-6 * 19125, rel=1e-12)
    assert e * FRAMES / 1e3 == pytest.approx(16.243, rel=0.01)
    assert kpi.energy_upf(model(), u, 4) == pytest.approx(2 * e, rel=1e-15)
    assert kpi.energy_upf(model(payload=0), u, 2) == 0.0


@settings(max_examples=50)
@given(st.floats(1e3, 1e7), st.floats(0.01, 100))
def test_network_terms_homogeneous_in_payload(payload, k):
    r = kpi.RadioConfig(50e6, 0.2, 200, 200, 390, 0.27, 1e9)
    u = kpi.UpfConfig()
    a, b = model(payload=payload), model(payload=payload * k)
    for fn in (lambda m: kpi.energy_transmission(m, r), lambda m: sum(kpi.energy_ap(m, r)),
               lambda m: kpi.energy_transport(m, [_L()] * 3), lambda m: kpi.energy_upf(m, u, 2)):
        assert fn(b) == pytest.approx(k * fn(a), rel=1e-9)
    assert kpi.energy_processing(RPI5, a) == kpi.energy_processing(RPI5, b)


def test_total_energy():
    assert kpi.total_energy().total == 0.0
    led = kpi.total_energy(ue_proc=1.0, cloud_proc=2.5)
    assert led.total == 3.5 and led.network == 0.0
    with pytest.raises(TypeError):
        kpi.total_energy(battery=1.0)


def test_table_column_sum():
    # IIoT-C Atom column, kJ
    col = dict(ue_proc=19.224, ue_trans=0.179, ap_recv=47.225, tn=1.901, upf=1.718, cloud_proc=3.359)
    assert kpi.total_energy(**col).total == pytest.approx(73.606, abs=1e-9)


@given(st.lists(st.floats(0, 1e9), min_size=7, max_size=7))
def test_ledger_total_is_sum(vals):
    led = kpi.EnergyLedger(*vals)
    assert led.total == pytest.approx(sum(vals), rel=1e-9, abs=1e-300)


# latency ----------------------------------------------------------------------------

def test_latency_on_device():
    lat = kpi.latency_components(model(), RPI5)
    assert lat.total == pytest.approx(195.9 / 31, rel=1e-12)
    assert lat.radio == lat.transport == lat.routing == 0.0


def test_latency_tiot_remote(repro):
    from goiot.topology import shortest_path
    path = shortest_path(repro.graph, "ap0", "remote")
    lat = kpi.latency_components(repro.models["640X"], repro.hardware["xeon-8480c"], path, repro.radio, repro.upf)
    assert lat.total == pytest.approx(0.196608 + 0.168 + 195.9 / 2329, rel=1e-12)
    assert lat.total == pytest.approx(0.4487, rel=1e-3)


def test_latency_zero():
    assert kpi.latency_components(model(gflop=0.0, payload=0.0), RPI5).total == 0.0


# accuracy ---------------------------------------------------------------------------

def test_metrics_perfect():
    assert kpi.confusion_to_metrics(kpi.ConfusionCounts(tp=100)) == (1.0, 1.0, 1.0, 0.0)


def test_f1_known_value():
    assert kpi.f1_score(0.8, 0.6) == pytest.approx(0.685714, abs=1e-6)
    # P = 4/5, R = 3/5 from counts
    _, _, f1, inacc = kpi.confusion_to_metrics(kpi.ConfusionCounts(tp=12, fp=3, fn=8, tn=0))
    assert f1 == pytest.approx(24 / 35, rel=1e-12)
    assert inacc == pytest.approx(11 / 35, rel=1e-12)


@pytest.mark.parametrize("c", [kpi.ConfusionCounts(fp=3, fn=2), kpi.ConfusionCounts(fn=5),
                               kpi.ConfusionCounts(fp=5), kpi.ConfusionCounts(tn=9)])
def test_f1_degenerate(c):
    _, _, f1, inacc = kpi.confusion_to_metrics(c)
    assert f1 == 0.0 and inacc == 1.0


@given(st.integers(0, 1000), st.integers(0, 1000), st.integers(0, 1000))
def test_f1_bounds(tp, fp, fn):
    p, r, f1, _ = kpi.confusion_to_metrics(kpi.ConfusionCounts(tp, fp, fn, 0))
    assert 0.0 <= f1 <= 1.0
    assert min(p, r) - 1e-12 <= f1 <= 2 * min(p, r) + 1e-12
    assert f1 == pytest.approx(kpi.f1_from_counts(tp, fp, fn), abs=1e-12)


def _rule(truth, flags):
    """Cascade accounting spelled out frame by frame."""
    for flag in flags:
        if not flag:
            return "fn" if truth else "tn"
    return "tp" if truth else "fp"


def test_cascade_brute_force_two_stages():
    combos = list(itertools.product([False, True], repeat=3))
    truth = [c[0] for c in combos]
    outcomes = [[c[1] for c in combos], [c[2] for c in combos]]
    got = kpi.cascade_confusion(outcomes, truth)
    want = {"tp": 0, "fp": 0, "fn": 0, "tn": 0}
    for t, s1, s2 in combos:
        want[_rule(t, (s1, s2))] += 1
    assert got == kpi.ConfusionCounts(**want)
    # every combination in isolation
    for t, s1, s2 in combos:
        single = kpi.cascade_confusion([[s1], [s2]], [t])
        assert getattr(single, _rule(t, (s1, s2))) == 1


def test_cascade_positive_dropped_by_cloud_is_fn():
    assert kpi.cascade_confusion([[True], [False]], [True]) == kpi.ConfusionCounts(fn=1)


def test_cascade_negative_rejected_by_cloud_is_tn():
    assert kpi.cascade_confusion([[True], [False]], [False]) == kpi.ConfusionCounts(tn=1)


@settings(max_examples=50)
@given(st.lists(st.tuples(st.booleans(), st.booleans()), min_size=1, max_size=200))
def test_cascade_single_stage_and_transparency(frames):
    truth = [f[0] for f in frames]
    flags = [f[1] for f in frames]
    plain = kpi.ConfusionCounts(
        tp=sum(t and f for t, f in frames), fp=sum((not t) and f for t, f in frames),
        fn=sum(t and not f for t, f in frames), tn=sum((not t) and not f for t, f in frames),
    )
    assert kpi.cascade_confusion([flags], truth) == plain
    assert kpi.cascade_confusion([[True] * len(flags), flags], truth) == plain


def test_cascade_length_mismatch():
    with pytest.raises(MismatchedLengths):
        kpi.cascade_confusion([[True, False]], [True])


def test_expected_confusion_closed_form():
    tp, fp, fn, tn = kpi.expected_confusion(100, 0.1, [(0.9, 0.1), (0.8, 0.05)])
    assert (tp, fp, fn, tn) == pytest.approx((7.2, 0.45, 2.8, 89.55))


def test_detector_profile_validation():
    with pytest.raises(ValueError):
        kpi.DetectorProfile((0.0, 1.0), (0.5, 0.9), (0.1, 0.0))  # increasing TPR
    with pytest.raises(ValueError):
        kpi.DetectorProfile((0.0, 1.0), (1.0, 0.5), (1.2, 0.0))
    d = kpi.DetectorProfile((0.0, 0.5, 1.0), (1.0, 0.8, 0.0), (0.4, 0.2, 0.0))
    assert d.rates(0.25) == pytest.approx((0.9, 0.3))
    lg = kpi.DetectorProfile.logistic(0.65, -0.355, 0.1)
    assert lg.rates(0.1)[0] == pytest.approx(1 / (1 + np.exp(-5.5)), rel=1e-12)
