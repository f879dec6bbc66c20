import pytest
from hypothesis import HealthCheck, settings

from qclf import corpus as qc
from qclf import features as qf
from qclf import synth
from qclf.corpus import QuestionRecord, Token
from qclf.evaluation import prepare
from qclf.taxonomy import validate_label

settings.register_profile("qclf", deadline=None, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("qclf")


def make_record(rid, annotated, label="PER:INDIVIDUAL", split=None):
    """Record from ``form/POS/chunk[/NE]`` tokens; the last token is the end marker."""
    tokens = []
    for item in annotated.split():
        parts = item.split("/")
        ne = parts[3] if len(parts) > 3 else None
        chunk = parts[2] if len(parts) > 2 else "O"
        tokens.append(Token(parts[0], parts[1], chunk, ne))
    coarse, _, fine = label.partition(":")
    return QuestionRecord(rid, " ".join(t.form for t in tokens), tuple(tokens), tokens[-1].form,
                          validate_label(coarse, fine or None), split)


@pytest.fixture(scope="session")
def sample():
    return synth.bundled_sample()


@pytest.fixture(scope="session")
def sample_by_text(sample):
    return {r.text: r for r in sample}


@pytest.fixture(scope="session")
def bench_records():
    return synth.benchmark_corpus(seed=0, n=400)


@pytest.fixture(scope="session")
def bench(bench_records):
    """Vectorized train/test split of a small noisy benchmark corpus."""
    train, test = qc.split_corpus(bench_records, qc.RatioSplit(0.7, 0))
    return prepare(train, test, qf.FeatureConfig.from_name("fl+fs+fm"))


def random_dataset(rng, n, N, K, weights=False):
    from qclf.learners import Dataset
    X = rng.integers(0, 3, size=(n, N)).astype(float)
    y = rng.integers(0, K, size=n)
    w = None
    if weights:
        w = rng.random(n) + 0.01
        w /= w.sum()
    return Dataset(X, y, K, w)


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
