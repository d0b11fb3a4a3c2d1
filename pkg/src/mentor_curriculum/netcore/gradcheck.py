"""Central finite-difference gradient checking.

The numeric side perturbs parameters in place and re-runs a scalar loss
closure, so it stays fully independent of any analytic backward pass it
is used to validate.
"""

import numpy as np

FD_STEP = 1e-6  # balances truncation vs rounding error at float64


def numeric_gradient(loss_fn, array, h=FD_STEP):
    """d loss_fn() / d array by central differences, one entry at a time.

    `array` is perturbed in place and restored; loss_fn takes no arguments
    and must read the current contents of `array`.
    """
    grad = np.zeros_like(array)
    flat = array.reshape(-1)
    gflat = grad.reshape(-1)
    for k in range(flat.size):
        orig = flat[k]
        flat[k] = orig + h
        fp = loss_fn()
        flat[k] = orig - h
        fm = loss_fn()
        flat[k] = orig
        gflat[k] = (fp - fm) / (2.0 * h)
    return grad


def max_relative_error(analytic, numeric):
    """Relative error |a - n| / max(|a|, |n|, 1e-8) of one parameter array,
    with |.| the Euclidean norm over the array.

    The norm form keeps the check scale-free while staying above the
    rounding noise of the difference quotient; entrywise ratios would drown
    genuinely tiny gradient entries in that noise.
    """
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    if analytic.shape != numeric.shape:
        raise ValueError("analytic/numeric gradient shapes differ")
    if analytic.size == 0:
        return 0.0
    na = np.linalg.norm(analytic.ravel())
    nn = np.linalg.norm(numeric.ravel())
    return float(np.linalg.norm((analytic - numeric).ravel()) / max(na, nn, 1e-8))


def grad_check(loss_fn, arrays, analytic, h=FD_STEP):
    """Compare analytic gradients against finite differences.

    arrays: dict name -> parameter array (perturbed in place and restored).
    analytic: dict name -> gradient array, as computed by the backward pass.
    Returns dict name -> max relative error.
    """
    base = loss_fn()
    if not np.isfinite(base):
        raise ValueError(f"loss is not finite: {base}")
    report = {}
    for name, arr in arrays.items():
        a = analytic[name]
        if not np.all(np.isfinite(a)):
            raise ValueError(f"analytic gradient for {name!r} is not finite")
        n = numeric_gradient(loss_fn, arr, h=h)
        report[name] = max_relative_error(a, n)
    return report


def worst_error(report):
    return max(report.values()) if report else 0.0
