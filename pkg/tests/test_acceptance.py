"""Acceptance criteria, one test per criterion.

Each criterion prints a single ``criterion N: PASS|FAIL ...`` line; the lines
are repeated in the pytest terminal summary. Run standalone with
``python tests/test_acceptance.py`` to print the lines without pytest.
"""

import csv
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import crand, rand_orthonormal, rand_phases, rel_err  # noqa: E402
from risbeam.baselines import AoParams, CodebookParams, run_ao_single, run_codebook, run_multistart_ao  # noqa: E402
from risbeam.channel_model import SystemDims, composite_tensor, effective_channel, gen_rayleigh  # noqa: E402
from risbeam.cli import main as cli_main  # noqa: E402
from risbeam.cli import parse_config_text, run_experiment  # noqa: E402
from risbeam.complexity import analytic_cost, loglog_slope, measure_run  # noqa: E402
from risbeam.decompositions import unit_modulus_ascent  # noqa: E402
from risbeam.evaluation import feasibility_audit  # noqa: E402
from risbeam.ms_tao import MsTaoParams, blkdiag, run_ms_tao, surrogate_value  # noqa: E402
from risbeam.tensor_core import khatri_rao, mode_product, tensorize_composite, unfold  # noqa: E402

REPORT: list = []
REF_DIMS = SystemDims.uniform(m_r=16, k=2, m_tk=4, r_ue=2, n=64)
DESK = SystemDims(m_r=8, m_tk=(3, 2), r_k=(2, 1), n=16)
NS = [32, 64, 128, 256]


def report(num: int, ok: bool, detail: str) -> bool:
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}"
    REPORT.append(line)
    print(line)
    return ok


# ---------- loop oracles for criterion 1 ----------

def loop_unfold(t, mode):
    d = t.shape
    ax = mode - 1
    others = [i for i in range(3) if i != ax]
    out = np.zeros((d[ax], d[others[0]] * d[others[1]]), dtype=complex)
    for idx in np.ndindex(*d):
        out[idx[ax], idx[others[0]] + idx[others[1]] * d[others[0]]] = t[idx]
    return out


def loop_mode_product(t, m, mode):
    ax = mode - 1
    shape = list(t.shape)
    shape[ax] = m.shape[0]
    out = np.zeros(shape, dtype=complex)
    for idx in np.ndindex(*shape):
        src = list(idx)
        acc = 0j
        for p in range(t.shape[ax]):
            src[ax] = p
            acc += m[idx[ax], p] * t[tuple(src)]
        out[idx] = acc
    return out


def loop_khatri_rao(a, b):
    out = np.zeros((a.shape[0] * b.shape[0], a.shape[1]), dtype=complex)
    for i in range(a.shape[0]):
        for j in range(b.shape[0]):
            for n in range(a.shape[1]):
                out[i * b.shape[0] + j, n] = a[i, n] * b[j, n]
    return out


def loop_tensorize(tmat, m_r, m_t, n):
    out = np.zeros((m_r, m_t, n), dtype=complex)
    for i, j, k in np.ndindex(m_r, m_t, n):
        out[i, j, k] = tmat[i + j * m_r, k]
    return out


# ---------- criteria ----------

def criterion_1():
    rng = np.random.default_rng(1)
    start, worst = time.perf_counter(), 0.0
    for _ in range(200):
        d = tuple(int(x) for x in rng.integers(1, 7, size=3))
        t = crand(rng, *d)
        for mode in (1, 2, 3):
            worst = max(worst, rel_err(unfold(t, mode), loop_unfold(t, mode)))
            m = crand(rng, int(rng.integers(1, 7)), d[mode - 1])
            worst = max(worst, rel_err(mode_product(t, m, mode), loop_mode_product(t, m, mode)))
        cols = int(rng.integers(1, 7))
        a, b = crand(rng, d[0], cols), crand(rng, d[1], cols)
        worst = max(worst, rel_err(khatri_rao(a, b), loop_khatri_rao(a, b)))
        tmat = crand(rng, d[0] * d[1], d[2])
        worst = max(worst, rel_err(tensorize_composite(tmat, d[0], d[1], d[2]), loop_tensorize(tmat, *d)))
    secs = time.perf_counter() - start
    return report(1, worst <= 1e-12 and secs < 10, f"200 instances, max rel err {worst:.2e}, {secs:.1f} s")


def criterion_2():
    rng = np.random.default_rng(2)
    start, worst = time.perf_counter(), 0.0
    for trial in range(120):
        if trial % 2:
            dims = REF_DIMS
        else:
            k = int(rng.integers(1, 4))
            m_tk = tuple(int(x) for x in rng.integers(1, 5, size=k))
            r_k = tuple(int(rng.integers(1, m + 1)) for m in m_tk)
            dims = SystemDims(m_r=sum(r_k) + int(rng.integers(0, 3)), m_tk=m_tk, r_k=r_k, n=int(rng.integers(1, 20)))
        ch = gen_rayleigh(dims, rng)
        w = rand_orthonormal(rng, dims.m_r, dims.r)
        q = [rand_orthonormal(rng, mt, rk) for mt, rk in zip(dims.m_tk, dims.r_k)]
        s = rand_phases(rng, dims.n)
        a = w.conj().T @ effective_channel(ch, s) @ blkdiag(q)
        matrix_f = float(np.sum(np.abs(a) ** 2))
        tensor_f = surrogate_value(composite_tensor(ch), w, q, s)
        worst = max(worst, abs(matrix_f - tensor_f) / max(matrix_f, 1e-300))
    secs = time.perf_counter() - start
    return report(2, worst <= 1e-10 and secs < 30, f"120 instances (60 at reference dims), max rel gap {worst:.2e}, {secs:.1f} s")


def criterion_3():
    bad, runs = [], 0
    for seed in range(100):
        ch = gen_rayleigh(DESK, seed)
        sols = {
            "ms_tao": run_ms_tao(composite_tensor(ch), DESK),
            "multistart_ao": run_multistart_ao(ch, DESK, AoParams(), seed=seed),
            "codebook": run_codebook(ch, DESK, CodebookParams()),
        }
        for name, sol in sols.items():
            runs += 1
            rep = feasibility_audit(sol, tol=1e-9)
            if not rep.ok:
                bad.append((name, seed, rep.violations()))
    return report(3, not bad and runs >= 300, f"{runs} runs, {len(bad)} infeasible")


def criterion_4():
    drops = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        ch = gen_rayleigh(DESK, rng)
        sol = run_ao_single(ch, DESK, rand_phases(rng, DESK.n), AoParams(1, 15, 25))
        drops += bool(np.any(np.diff(sol.f_trace) < -1e-9))
    rng = np.random.default_rng(4)
    ascent_drops = 0
    for _ in range(1000):
        n = int(rng.integers(1, 33))
        b = crand(rng, n, int(rng.integers(1, n + 1)))
        m = b @ b.conj().T
        _, trace = unit_modulus_ascent(m, rand_phases(rng, n), 20)
        scale = max(1.0, max(abs(v) for v in trace))
        ascent_drops += bool(np.any(np.diff(trace) < -1e-9 * scale))
    ok = drops == 0 and ascent_drops == 0
    return report(4, ok, f"AO traces decreasing: {drops}/100; ascent traces decreasing: {ascent_drops}/1000")


def criterion_5():
    improved = converged = 0
    iters = []
    for seed in range(500):
        sol = run_ms_tao(composite_tensor(gen_rayleigh(REF_DIMS, seed)), REF_DIMS, MsTaoParams(i_max=30, eps=1e-6))
        improved += sol.f_trace[-1] >= sol.f_init
        converged += sol.converged
        iters.append(sol.iterations)
    ok = improved >= 475 and converged >= 400
    return report(
        5, ok,
        f"final >= initial in {improved}/500 (need 475); converged in {converged}/500 (need 400); "
        f"mean iterations {np.mean(iters):.1f}",
    )


def _grid_optimum(ch, levels=16):
    phases = np.exp(2j * np.pi * np.arange(levels) / levels)
    n = ch.g.shape[1]
    grid = np.array(np.meshgrid(*([phases] * (n - 1)), indexing="ij")).reshape(n - 1, -1).T
    cands = np.hstack([np.ones((grid.shape[0], 1)), grid])
    eff = np.einsum("in,cn,nj->cij", ch.g, cands, ch.h)
    return float(np.max(np.linalg.svd(eff, compute_uv=False)[:, 0] ** 2))


def criterion_6():
    dims = SystemDims(m_r=2, m_tk=(2,), r_k=(1,), n=3)
    start = time.perf_counter()
    tao_hits = ao_hits = 0
    for seed in range(100):
        ch = gen_rayleigh(dims, seed)
        best = _grid_optimum(ch)
        tao_hits += run_ms_tao(composite_tensor(ch), dims).objective >= 0.95 * best
        ao_hits += run_multistart_ao(ch, dims, AoParams(), seed=seed).objective >= 0.95 * best
    secs = time.perf_counter() - start
    ok = tao_hits >= 90 and ao_hits >= 90 and secs < 60
    return report(6, ok, f"MS-TAO {tao_hits}/100, multi-start AO {ao_hits}/100 within 0.95 of grid, {secs:.1f} s")


def _summary_means(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {(r["method"], r["sweep_value"]): float(r["se_mean"]) for r in rows}


def criterion_7(summary_path):
    means = _summary_means(summary_path)
    lines, ok = [], True
    for snr in ("-10.0", "0.0", "10.0"):
        tao, ao, cb = (means[(m, snr)] for m in ("ms_tao", "multistart_ao", "codebook"))
        ok &= tao >= cb and tao >= 0.9 * ao
        lines.append(f"{snr} dB: tao {tao:.3f} ao {ao:.3f} cb {cb:.3f}")
    return report(7, ok, "; ".join(lines))


def criterion_8(out_dir, realizations=50):
    cfg = parse_config_text("", dict(experiment="user_sweep", realizations=realizations, out=str(out_dir)))
    means = _summary_means(run_experiment(cfg)["summary"])
    ok, notes = True, []
    for r in (1, 2):
        for method in ("ms_tao", "multistart_ao", "codebook"):
            seq = [means[(method, f"{k}/{r}")] for k in (1, 2, 3)]
            ok &= seq[0] < seq[1] < seq[2]
            notes.append(f"R_UE={r} {method} " + "/".join(f"{v:.2f}" for v in seq))
        ok &= all(means[("ms_tao", f"{k}/{r}")] >= means[("codebook", f"{k}/{r}")] for k in (1, 2, 3))
    return report(8, ok, f"{realizations} realizations; " + "; ".join(notes))


def criterion_9():
    params = {"ms_tao": MsTaoParams(), "multistart_ao": AoParams(), "codebook": CodebookParams()}
    analytic = {m: loglog_slope(NS, [analytic_cost(m, p, n, 4) for n in NS]) for m, p in params.items()}
    measured = {}
    for method, solver in (("ms_tao", None), ("multistart_ao", run_multistart_ao)):
        units = []
        for n in NS:
            dims = SystemDims.uniform(16, 2, 4, 2, n)
            per_seed = []
            for seed in range(2):
                ch = gen_rayleigh(dims, seed)
                if solver is None:
                    _, c = measure_run(run_ms_tao, composite_tensor(ch), dims)
                else:
                    _, c = measure_run(solver, ch, dims, AoParams(), seed=seed)
                per_seed.append(c.total)
            units.append(float(np.mean(per_seed)))
        measured[method] = loglog_slope(NS, units)
    spot = analytic_cost("ms_tao", MsTaoParams(), 64, 4)
    ok = (
        all(abs(analytic[m] - s) <= 1e-6 for m, s in (("ms_tao", 1), ("multistart_ao", 2), ("codebook", 3)))
        and abs(measured["ms_tao"] - 1) <= 0.15
        and abs(measured["multistart_ao"] - 2) <= 0.2
        and spot == 491_520
    )
    detail = (
        "analytic " + "/".join(f"{analytic[m]:.6f}" for m in params)
        + f"; measured MS-TAO {measured['ms_tao']:.3f}, AO {measured['multistart_ao']:.3f}; spot {spot:,}"
    )
    return report(9, ok, detail)


def run_snr_sweep_twice(base: Path):
    outs = []
    for tag in ("a", "b"):
        out = base / tag
        assert cli_main(["--experiment", "snr_sweep", "--seed", "0", "--out", str(out)]) == 0
        outs.append(out)
    return outs


def criterion_10(outs):
    a, b = outs
    names = ("snr_sweep_detail.csv", "snr_sweep_summary.csv")
    same = all((a / n).read_bytes() == (b / n).read_bytes() for n in names)
    return report(10, same, "detail and summary CSVs " + ("byte-identical" if same else "differ"))


# ---------- pytest wrappers ----------

@pytest.fixture(scope="module")
def snr_runs(tmp_path_factory):
    return run_snr_sweep_twice(tmp_path_factory.mktemp("snr_sweep"))


def test_criterion_1_algebraic_oracles():
    assert criterion_1()


def test_criterion_2_surrogate_equivalence():
    assert criterion_2()


@pytest.mark.slow
def test_criterion_3_feasibility():
    assert criterion_3()


def test_criterion_4_monotonicity():
    assert criterion_4()


@pytest.mark.slow
def test_criterion_5_ms_tao_self_consistency():
    assert criterion_5()


@pytest.mark.slow
def test_criterion_6_tiny_exhaustive_oracle():
    assert criterion_6()


@pytest.mark.slow
def test_criterion_7_snr_sweep_ordering(snr_runs):
    assert criterion_7(snr_runs[0] / "snr_sweep_summary.csv")


@pytest.mark.slow
def test_criterion_8_user_sweep_trends(tmp_path):
    assert criterion_8(tmp_path)


@pytest.mark.slow
def test_criterion_9_complexity_slopes():
    assert criterion_9()


@pytest.mark.slow
def test_criterion_10_determinism(snr_runs):
    assert criterion_10(snr_runs)


if __name__ == "__main__":
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        base = Path(tmp)
        outs = run_snr_sweep_twice(base)
        results = [
            criterion_1(), criterion_2(), criterion_3(), criterion_4(), criterion_5(), criterion_6(),
            criterion_7(outs[0] / "snr_sweep_summary.csv"), criterion_8(base / "users"), criterion_9(),
            criterion_10(outs),
        ]
    sys.exit(0 if all(results) else 1)
