"""Verification suites: every closed form against an independent oracle.

Three suites: grid minimization vs the clamped-ramp weights, quadrature vs
the closed-form penalties, and finite differences vs every hand-coded
backward pass. Each returns a small dict consumed by the CLI and tests.
"""

import numpy as np

from .curriculum import (
    RobustPenaltySpec,
    brute_force_weight,
    g_penalty,
    predefined_weight,
    rho_from_weighting,
    robust_penalty_value,
    robust_penalty_weight,
    underlying_objective,
)
from .mentornet import FeatureBatch, MentorNet
from .netcore import (
    BiLSTM,
    Dense,
    Embedding,
    LSTMCell,
    grad_check,
    softmax_xent_per_sample,
    substream,
    worst_error,
)
from .student import StudentNet, weighted_loss

SUITES = ("closed-form", "penalties", "gradcheck")


def suite_closed_form(seed=0, cases=1000):
    """Clamped-ramp weights vs the dense grid minimizer."""
    rng = substream(seed, "verify.closed-form")
    max_err = 0.0
    for _ in range(cases):
        loss = rng.uniform(0.0, 10.0)
        lam1 = rng.uniform(0.0, 3.0)
        lam2 = 0.0 if rng.random() < 1.0 / 6.0 else rng.uniform(0.1, 3.0)
        w = predefined_weight(loss, lam1, lam2)
        bf = brute_force_weight(loss, lambda v: g_penalty(v, lam1, lam2))
        max_err = max(max_err, abs(w - bf))
    tol = 2e-4
    return {"suite": "closed-form", "cases": cases, "max_error": max_err,
            "tolerance": tol, "pass": max_err <= tol}


def suite_penalties(seed=0, cases=100):
    """Quadrature of each weighting rule vs its closed-form penalty."""
    rng = substream(seed, "verify.penalties")
    max_err = 0.0
    n = 0
    for _ in range(cases):
        loss = rng.uniform(0.0, 10.0)
        lam1 = rng.uniform(0.0, 3.0)
        lam2 = rng.uniform(0.1, 3.0)
        quad = rho_from_weighting(lambda x: predefined_weight(x, lam1, lam2), loss)
        max_err = max(max_err, abs(quad - underlying_objective(loss, lam1, lam2)))
        n += 1
    specs = [
        (RobustPenaltySpec("huber", lam=1.0), np.linspace(0.0, 10.0, 50)),
        (RobustPenaltySpec("log-sum", lam=1.0, eps=1.0), np.linspace(0.0, 10.0, 50)),
        # restrict the Lorentzian to the regime where its raw weight is <= 1
        (RobustPenaltySpec("lorentzian", delta=1.0),
         np.linspace(np.sqrt(2.0), 10.0, 50)),
        (RobustPenaltySpec("mcp", lam=2.0), np.linspace(0.0, 10.0, 50)),
    ]
    for spec, grid in specs:
        for loss in grid:
            quad = rho_from_weighting(lambda x: robust_penalty_weight(spec, x), loss)
            max_err = max(max_err, abs(quad - robust_penalty_value(spec, loss)))
            n += 1
    tol = 1e-6
    return {"suite": "penalties", "cases": n, "max_error": max_err,
            "tolerance": tol, "pass": max_err <= tol}


def check_dense(rng, reps=3):
    worst = 0.0
    activations = ("identity", "tanh", "sigmoid")
    for rep in range(reps):
        b, din, dout = (int(x) for x in rng.integers(2, 6, size=3))
        layer = Dense(din, dout, activation=activations[rep % 3], rng=rng)
        x = rng.normal(size=(b, din))
        coef = rng.normal(size=(b, dout))

        def loss_fn():
            return float(np.sum(coef * layer.forward(x)))

        loss_fn()
        lg = layer.backward(coef)
        report = grad_check(
            loss_fn,
            {"weights": layer.weights, "bias": layer.bias, "input": x},
            {"weights": lg.params["weights"], "bias": lg.params["bias"],
             "input": lg.wrt_input},
        )
        worst = max(worst, worst_error(report))
    return worst


def check_embedding(rng, reps=3):
    worst = 0.0
    for _ in range(reps):
        vocab, dim, b = (int(x) for x in rng.integers(3, 7, size=3))
        emb = Embedding(vocab, dim, rng=rng)
        idx = rng.integers(0, vocab, size=b)
        coef = rng.normal(size=(b, dim))

        def loss_fn():
            return float(np.sum(coef * emb.lookup(idx)))

        loss_fn()
        lg = emb.backward(coef)
        report = grad_check(loss_fn, {"table": emb.table},
                            {"table": lg.params["table"]})
        worst = max(worst, worst_error(report))
    return worst


def check_lstm_cell(rng, reps=3):
    worst = 0.0
    for _ in range(reps):
        b, din, hid = (int(x) for x in rng.integers(2, 5, size=3))
        cell = LSTMCell(din, hid, rng=rng)
        x = rng.normal(size=(b, din))
        h0 = 0.5 * rng.normal(size=(b, hid))
        c0 = 0.5 * rng.normal(size=(b, hid))
        ch = rng.normal(size=(b, hid))
        cc = rng.normal(size=(b, hid))

        def loss_fn():
            h, c, _ = cell.step(x, h0, c0)
            return float(np.sum(ch * h) + np.sum(cc * c))

        _, _, cache = cell.step(x, h0, c0)
        grads = cell.zero_grads()
        dx, dh0, dc0 = cell.step_backward(cache, ch, cc, grads)
        arrays = dict(cell.params())
        arrays.update({"x": x, "h0": h0, "c0": c0})
        analytic = dict(grads)
        analytic.update({"x": dx, "h0": dh0, "c0": dc0})
        worst = max(worst, worst_error(grad_check(loss_fn, arrays, analytic)))
    return worst


def check_bilstm(rng, reps=3, T=3):
    worst = 0.0
    for _ in range(reps):
        b, din, hid = (int(x) for x in rng.integers(2, 5, size=3))
        enc = BiLSTM(LSTMCell(din, hid, rng=rng), LSTMCell(din, hid, rng=rng))
        seq = rng.normal(size=(b, T, din))
        coef = rng.normal(size=(b, 2 * hid))

        def loss_fn():
            return float(np.sum(coef * enc.encode(seq)))

        loss_fn()
        g = enc.backward(coef)
        arrays = {"seq": seq}
        analytic = {"seq": g["seq"]}
        for prefix, cell, grads in (("fwd", enc.fwd, g["fwd"]),
                                    ("bwd", enc.bwd, g["bwd"])):
            for name, arr in cell.params().items():
                arrays[f"{prefix}.{name}"] = arr
                analytic[f"{prefix}.{name}"] = grads[name]
        worst = max(worst, worst_error(grad_check(loss_fn, arrays, analytic)))
    return worst


def check_softmax(rng, reps=3):
    worst = 0.0
    for _ in range(reps):
        b, m = (int(x) for x in rng.integers(2, 6, size=2))
        logits = rng.normal(size=(b, m))
        labels = rng.integers(0, m, size=b)
        coef = rng.normal(size=b)

        def loss_fn():
            losses, _ = softmax_xent_per_sample(logits, labels)
            return float(coef @ losses)

        _, dl = softmax_xent_per_sample(logits, labels)
        report = grad_check(loss_fn, {"logits": logits},
                            {"logits": coef[:, None] * dl})
        worst = max(worst, worst_error(report))
    return worst


def check_mentornet(rng, reps=3, T=2):
    worst = 0.0
    for _ in range(reps):
        net = MentorNet(n_labels=4, rng=rng)
        b = 3
        losses = rng.uniform(0.0, 4.0, size=(b, T))
        diffs = rng.uniform(-2.0, 2.0, size=(b, T))
        fb = FeatureBatch(np.stack([losses, diffs], axis=2),
                          rng.integers(0, 4, size=b),
                          rng.integers(0, 100, size=b))
        target = rng.uniform(0.0, 1.0, size=b)

        def loss_fn():
            v = net.forward(fb)
            return float(np.mean((v - target) ** 2))

        v = net.forward(fb)
        grads = net.backward(2.0 * (v - target) / b)
        worst = max(worst, worst_error(grad_check(loss_fn, net.params(), grads)))
    return worst


def check_student(rng, reps=3):
    worst = 0.0
    for _ in range(reps):
        b, din, m = (int(x) for x in rng.integers(3, 6, size=3))
        net = StudentNet(din, hidden=(4, 3), classes=m, theta0=0.05, rng=rng)
        x = rng.normal(size=(b, din))
        y = rng.integers(0, m, size=b)
        v = rng.uniform(0.0, 1.0, size=b)
        theta_t = net.theta0

        def loss_fn():
            losses, _ = net.per_sample_losses(x, y)
            return weighted_loss(losses, v, theta_t, net.l2_norm_sq())

        logits = net.forward(x)
        _, dl = softmax_xent_per_sample(logits, y)
        grads, _ = net.backward(dl * (v / b)[:, None])
        analytic = {name: grads[name] + 2.0 * theta_t * p
                    for name, p in net.params().items()}
        worst = max(worst, worst_error(grad_check(loss_fn, net.params(), analytic)))
    return worst


GRAD_CHECKS = (
    ("dense", check_dense),
    ("embedding", check_embedding),
    ("lstm-cell", check_lstm_cell),
    ("bilstm", check_bilstm),
    ("softmax-xent", check_softmax),
    ("mentornet", check_mentornet),
    ("studentnet", check_student),
)


def suite_gradcheck(seed=0):
    """Every differentiable unit vs central finite differences."""
    max_err = 0.0
    n = 0
    for name, fn in GRAD_CHECKS:
        rng = substream(seed, f"verify.gradcheck.{name}")
        max_err = max(max_err, fn(rng))
        n += 3
    tol = 1e-5
    return {"suite": "gradcheck", "cases": n, "max_error": max_err,
            "tolerance": tol, "pass": max_err <= tol}


def run_suites(names, seed=0):
    runners = {"closed-form": suite_closed_form,
               "penalties": suite_penalties,
               "gradcheck": suite_gradcheck}
    results = []
    for name in names:
        if name not in runners:
            raise ValueError(f"unknown suite {name!r}; choose from {SUITES}")
        results.append(runners[name](seed=seed))
    return results
