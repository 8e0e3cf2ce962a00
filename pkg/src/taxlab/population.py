"""Worker population calibration.

Income draws come from a generalized beta distribution of the second kind
(GB2), either with known parameters or fitted by maximum likelihood to a
sample such as survey microdata. Incomes convert to hourly skill via a
reference workweek, and each worker can carry a persona card used by the
chat-based policies and the satisfaction rule.
"""

import csv
import json
from dataclasses import dataclass, replace
from importlib import resources

import numpy as np
from scipy.optimize import minimize
from scipy.special import betainc, betaincinv, betaln, digamma, expit

DEFAULT_REFERENCE_HOURS = 40.0


@dataclass(frozen=True)
class Gb2Params:
    """GB2(a, b, p, q): b scales, a controls tail decay, p and q shape the
    lower and upper tails respectively."""

    a: float
    b: float
    p: float
    q: float

    def __post_init__(self):
        for name in ("a", "b", "p", "q"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError("%s must be finite and positive, got %r" % (name, v))

    def to_dict(self):
        return {"a": self.a, "b": self.b, "p": self.p, "q": self.q}

    @classmethod
    def from_dict(cls, payload):
        return cls(a=float(payload["a"]), b=float(payload["b"]),
                   p=float(payload["p"]), q=float(payload["q"]))


def gb2_logpdf(x, params):
    x = np.asarray(x, dtype=np.float64)
    a, b, p, q = params.a, params.b, params.p, params.q
    out = np.full(x.shape, -np.inf)
    pos = x > 0
    logx = np.log(x[pos])
    lr = a * (logx - np.log(b))
    out[pos] = (np.log(a) + (a * p - 1.0) * (logx - np.log(b)) - np.log(b)
                - betaln(p, q) - (p + q) * np.logaddexp(0.0, lr))
    if out.ndim == 0:
        return float(out)
    return out


def gb2_pdf(x, params):
    """Density; zero for x <= 0."""
    out = np.exp(gb2_logpdf(x, params))
    if np.ndim(out) == 0:
        return float(out)
    return out


def gb2_cdf(x, params):
    """Distribution function via the regularized incomplete beta at
    t = (x/b)^a / (1 + (x/b)^a)."""
    x = np.asarray(x, dtype=np.float64)
    t = np.zeros(x.shape)
    pos = x > 0
    t[pos] = expit(params.a * (np.log(x[pos]) - np.log(params.b)))
    out = betainc(params.p, params.q, t)
    if out.ndim == 0:
        return float(out)
    return out


def gb2_quantile(u, params):
    """Inverse CDF; u=0 maps to 0 and u=1 to inf."""
    u = np.asarray(u, dtype=np.float64)
    if np.any((u < 0) | (u > 1)) or not np.all(np.isfinite(u)):
        raise ValueError("quantile argument must lie in [0, 1]")
    t = betaincinv(params.p, params.q, u)
    with np.errstate(divide="ignore"):
        out = params.b * np.exp((np.log(t) - np.log1p(-t)) / params.a)
    out = np.where(u == 0.0, 0.0, np.where(u == 1.0, np.inf, out))
    if out.ndim == 0:
        return float(out)
    return out


def gb2_sample(params, n, seed):
    """Inverse-transform sample of size n; a given seed fixes the draw."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    rng = np.random.default_rng(seed)
    return gb2_quantile(rng.random(n), params)


def gb2_loglik(samples, params):
    return float(np.sum(gb2_logpdf(samples, params)))


def _nll_and_grad(theta, logx):
    """Negative log-likelihood and gradient in log-parameter space."""
    a, b, p, q = np.exp(theta)
    n = logx.shape[0]
    lr = a * (logx - np.log(b))
    s1 = float(np.sum(logx))
    s2 = float(np.sum(np.logaddexp(0.0, lr)))
    t = expit(lr)
    sum_t = float(np.sum(t))
    sum_t_lr = float(np.sum(t * (logx - np.log(b))))

    loglik = (n * np.log(a) + (a * p - 1.0) * (s1 - n * np.log(b))
              - n * np.log(b) - n * betaln(p, q) - (p + q) * s2)
    d_a = n / a + p * (s1 - n * np.log(b)) - (p + q) * sum_t_lr
    d_b = -n * a * p / b + (p + q) * (a / b) * sum_t
    d_p = a * (s1 - n * np.log(b)) - n * (digamma(p) - digamma(p + q)) - s2
    d_q = -n * (digamma(q) - digamma(p + q)) - s2
    grad = -np.array([d_a * a, d_b * b, d_p * p, d_q * q])
    return -loglik, grad


@dataclass(frozen=True)
class Gb2FitResult:
    params: Gb2Params
    loglik: float

    def to_dict(self):
        out = self.params.to_dict()
        out["loglik"] = self.loglik
        return out


def fit_gb2(samples, n_starts=6, seed=0):
    """Maximum-likelihood GB2 fit with multi-start quasi-Newton refinement.

    Starts combine a few tail-decay guesses with scale guesses at the median
    and geometric mean; the best converged likelihood wins.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] < 100:
        raise ValueError("need at least 100 samples, got %d" % (x.size,))
    if np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise ValueError("samples must be finite and positive")
    if float(np.max(x)) == float(np.min(x)):
        raise ValueError("degenerate sample: all values equal")

    logx = np.log(x)
    median = float(np.median(x))
    gmean = float(np.exp(np.mean(logx)))
    rng = np.random.default_rng(seed)

    starts = []
    for a0 in (1.0, 2.0, 4.0):
        for b0 in (median, gmean):
            starts.append((a0, b0, 1.0, 1.0))
    while len(starts) < n_starts:
        starts.append((float(rng.uniform(0.5, 6.0)), median * float(rng.uniform(0.5, 2.0)),
                       float(rng.uniform(0.3, 3.0)), float(rng.uniform(0.3, 3.0))))
    starts = starts[:max(n_starts, 1)]

    bounds = [
        (np.log(0.05), np.log(60.0)),
        (np.log(median * 1e-4), np.log(median * 1e4)),
        (np.log(0.05), np.log(60.0)),
        (np.log(0.05), np.log(60.0)),
    ]

    best = None
    for a0, b0, p0, q0 in starts:
        theta0 = np.log([a0, b0, p0, q0])
        res = minimize(_nll_and_grad, theta0, args=(logx,), jac=True,
                       method="L-BFGS-B", bounds=bounds,
                       options={"maxiter": 500})
        if best is None or res.fun < best.fun:
            best = res
    a, b, p, q = np.exp(best.x)
    params = Gb2Params(a=float(a), b=float(b), p=float(p), q=float(q))
    return Gb2FitResult(params=params, loglik=-float(best.fun))


def gb2_qq(samples, params):
    """Sample order statistics against model quantiles at the matching
    plotting positions; feeds the Q-Q export and fit diagnostics."""
    x = np.sort(np.asarray(samples, dtype=np.float64))
    u = (np.arange(1, x.shape[0] + 1) - 0.5) / x.shape[0]
    return x, gb2_quantile(u, params)


@dataclass(frozen=True)
class Persona:
    """Background card for one worker: who they are, roughly what they earn,
    and the thresholds their satisfaction verdict keys off."""

    id: str
    occupation: str
    age: int
    income_anchor: float
    min_retention: float
    max_effective_rate: float
    text: str

    def __post_init__(self):
        if not (0.0 <= self.min_retention <= 1.0):
            raise ValueError("min_retention must be in [0, 1]")
        if not (0.0 <= self.max_effective_rate <= 1.0):
            raise ValueError("max_effective_rate must be in [0, 1]")
        if self.income_anchor <= 0:
            raise ValueError("income_anchor must be positive")


def load_personas(path=None):
    """Persona library from JSON; defaults to the bundled eleven-card set."""
    if path is None:
        payload = json.loads(
            resources.files("taxlab").joinpath("data/personas.json").read_text())
    else:
        with open(path) as fh:
            payload = json.load(fh)
    personas = [Persona(**entry) for entry in payload]
    ids = [p.id for p in personas]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate persona ids in library")
    return personas


def assign_personas(n, library, seed):
    """Deterministically sample n persona cards with replacement, suffixing
    ids so repeated cards stay distinguishable."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if not library:
        raise ValueError("persona library is empty")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, len(library), size=n)
    seen = {}
    out = []
    for i in idx:
        card = library[i]
        count = seen.get(card.id, 0)
        seen[card.id] = count + 1
        if count == 0:
            out.append(card)
        else:
            out.append(replace(card, id="%s#%d" % (card.id, count + 1)))
    return out


@dataclass(frozen=True)
class SkillProfile:
    worker_id: int
    skill: float
    persona: Persona = None

    def __post_init__(self):
        if self.skill < 0 or not np.isfinite(self.skill):
            raise ValueError("skill must be finite and nonnegative")


def skills_from_incomes(incomes, reference_hours=DEFAULT_REFERENCE_HOURS,
                        personas=None):
    """Hourly-equivalent skills such that income = skill * reference_hours
    at the reference workweek; one profile per income, in order."""
    if reference_hours <= 0:
        raise ValueError("reference_hours must be positive")
    z = np.asarray(incomes, dtype=np.float64)
    if z.ndim != 1:
        raise ValueError("incomes must be 1-d")
    if np.any(z <= 0) or np.any(~np.isfinite(z)):
        raise ValueError("incomes must be finite and positive")
    if personas is not None and len(personas) != z.shape[0]:
        raise ValueError("personas and incomes must align")
    return [
        SkillProfile(worker_id=i, skill=float(z[i] / reference_hours),
                     persona=None if personas is None else personas[i])
        for i in range(z.shape[0])
    ]


def load_income_csv(path, column="income"):
    """Incomes from a CSV with a named column; bad rows fail loudly with
    their line number."""
    incomes = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or column not in reader.fieldnames:
            raise ValueError("%s: missing required column %r" % (path, column))
        for row in reader:
            line = reader.line_num
            raw = row.get(column)
            if raw is None or raw.strip() == "":
                raise ValueError("%s:%d: empty %s value" % (path, line, column))
            try:
                value = float(raw)
            except ValueError:
                raise ValueError(
                    "%s:%d: non-numeric %s value %r" % (path, line, column, raw)) from None
            if not np.isfinite(value) or value < 0:
                raise ValueError(
                    "%s:%d: income must be finite and nonnegative, got %r" % (path, line, raw))
            incomes.append(value)
    if not incomes:
        raise ValueError("%s: no data rows" % (path,))
    return np.asarray(incomes, dtype=np.float64)


def bundled_income_csv():
    """Filesystem path of the packaged synthetic survey-style income sample."""
    return str(resources.files("taxlab").joinpath("data/acs_like_incomes.csv"))
