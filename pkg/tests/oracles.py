"""Independent reference computations. Plain Python only: no numpy, no package math."""
import math
import re


def advantages(rewards, eps=1e-6):
    n = len(rewards)
    mean = math.fsum(rewards) / n
    var = math.fsum((r - mean) ** 2 for r in rewards) / n
    std = math.sqrt(var)
    if std == 0.0:
        return [0.0] * n
    return [(r - mean) / (std + eps) for r in rewards]


def _log_softmax(z):
    m = max(z)
    lse = m + math.log(math.fsum(math.exp(x - m) for x in z))
    return [x - lse for x in z]


def objective(theta, ref_theta, points, beta):
    """points: list of (candidate feature-index tuples, chosen index, coefficient).

    Returns sum_p coef_p log pi(chosen_p) - beta * mean_p KL(pi || pi_ref)."""
    total, kls = [], []
    for rows, chosen, coef in points:
        z = [math.fsum(theta[i] for i in row) for row in rows]
        zr = [math.fsum(ref_theta[i] for i in row) for row in rows]
        lp, lr = _log_softmax(z), _log_softmax(zr)
        total.append(coef * lp[chosen])
        kls.append(math.fsum(math.exp(a) * (a - b) for a, b in zip(lp, lr)))
    if not points:
        return 0.0
    return math.fsum(total) - beta * math.fsum(kls) / len(kls)


def coverage_hits(steps, checkpoints):
    """First-hit index per checkpoint id, by direct reading of the matching rules.

    steps: StepRecord-likes; checkpoints: Checkpoint-likes.
    """
    revealing = {"goto", "open", "examine", "take", "look"}
    hits = {c.id: None for c in checkpoints}
    for rec in steps:
        a = rec.action
        ok = rec.outcome == "ok" and a is not None
        for c in checkpoints:
            if hits[c.id] is not None:
                continue
            if c.category == "location":
                hit = ("you arrive at " + c.target + ".") in rec.observation.lower()
            elif c.category == "object":
                hit = ok and a.verb in revealing and re.search(
                    r"(?<![a-z0-9])" + re.escape(c.target) + r"(?![0-9])", rec.observation) is not None
            else:
                if not ok or a.verb != c.verb:
                    hit = False
                elif a.verb in ("heat", "cool", "clean"):
                    hit = a.arg2 == c.target
                else:
                    hit = a.arg1 == c.target
            if hit:
                hits[c.id] = rec.index
    return hits


def categorical_kl(p, q):
    return math.fsum(a * math.log(a / b) for a, b in zip(p, q) if a > 0)
