"""Single-hidden-layer sigmoid MLP trained with Levenberg-Marquardt.

Parameters are handled as one flat vector in a fixed order::

    hidden weights (C x HN, row-major) | hidden biases (HN) | output weights (HN) | output bias

which is the column order of :func:`jacobian` and of the persisted model file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.linalg.lapack import dposv as _posv

from .color import FEATURE_RANGES, RATIO_CAP, RATIO_EPS, FeatureKind

FORMAT_NAME = "skinfusion-mlp"
FORMAT_VERSION = 1
MAX_HIDDEN = 128


class FormatError(ValueError):
    """A persisted document is malformed or has an unsupported version."""


@dataclass(frozen=True)
class Topology:
    inputs: int
    hidden: int
    outputs: int = 1

    def __post_init__(self):
        if self.outputs != 1:
            raise ValueError("only single-output networks are supported")
        if not 1 <= self.inputs <= 3:
            raise ValueError(f"input count must be in [1, 3], got {self.inputs}")
        if not 1 <= self.hidden <= MAX_HIDDEN:
            raise ValueError(f"hidden size must be in [1, {MAX_HIDDEN}], got {self.hidden}")

    @property
    def n_params(self) -> int:
        return self.inputs * self.hidden + 2 * self.hidden + 1

    def __str__(self) -> str:
        return f"{self.inputs}-{self.hidden}-{self.outputs}"


@dataclass(frozen=True)
class TrainConfig:
    max_epochs: int = 500
    goal_mse: float = 1e-6
    lambda0: float = 1e-3
    lambda_up: float = 10.0
    lambda_down: float = 10.0
    lambda_max: float = 1e10

    def __post_init__(self):
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if not self.goal_mse > 0:
            raise ValueError("goal_mse must be > 0")
        if not (self.lambda_up > 1 and self.lambda_down > 1):
            raise ValueError("damping factors must be > 1")
        if not self.lambda0 > 0 or not self.lambda_max > self.lambda0:
            raise ValueError("need 0 < lambda0 < lambda_max")


@dataclass
class Network:
    topology: Topology
    w_hidden: np.ndarray  # (C, HN)
    b_hidden: np.ndarray  # (HN,)
    w_out: np.ndarray  # (HN,)
    b_out: float
    # None for networks whose inputs are not chrominance features (the stacker)
    feature_kinds: Optional[tuple[FeatureKind, ...]] = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        c, hn = self.topology.inputs, self.topology.hidden
        self.w_hidden = np.asarray(self.w_hidden, dtype=np.float64).reshape(c, hn)
        self.b_hidden = np.asarray(self.b_hidden, dtype=np.float64).reshape(hn)
        self.w_out = np.asarray(self.w_out, dtype=np.float64).reshape(hn)
        self.b_out = float(self.b_out)
        if self.feature_kinds is not None:
            self.feature_kinds = tuple(FeatureKind(k) for k in self.feature_kinds)
            if len(self.feature_kinds) != c:
                raise ValueError(
                    f"{len(self.feature_kinds)} feature kinds for a {c}-input network"
                )
        if not np.all(np.isfinite(self.params)):
            raise ValueError("network weights must be finite")

    @property
    def params(self) -> np.ndarray:
        return np.concatenate(
            [self.w_hidden.ravel(), self.b_hidden, self.w_out, [self.b_out]]
        )

    def with_params(self, theta: np.ndarray, **provenance) -> "Network":
        c, hn = self.topology.inputs, self.topology.hidden
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape != (self.topology.n_params,):
            raise ValueError(f"expected {self.topology.n_params} parameters, got {theta.shape}")
        i = c * hn
        return replace(
            self,
            w_hidden=theta[:i].reshape(c, hn).copy(),
            b_hidden=theta[i : i + hn].copy(),
            w_out=theta[i + hn : i + 2 * hn].copy(),
            b_out=float(theta[-1]),
            provenance={**self.provenance, **provenance},
        )

    def __call__(self, x) -> np.ndarray:
        return forward(self, x)


class TrainResult(NamedTuple):
    network: Network
    train_mse: np.ndarray  # per accepted epoch, index 0 = initial weights
    val_mse: np.ndarray
    stop_reason: str  # "goal" | "max_epochs" | "lambda_max"


def sigmoid(z):
    # tanh form is overflow-free for large |z|
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=np.float64)))


def init_network(
    topology: Topology,
    kinds: Optional[Sequence[FeatureKind]],
    seed: int,
) -> Network:
    """Uniform [-0.5, 0.5] weights from a generator keyed by ``seed``."""
    if kinds is not None and len(kinds) != topology.inputs:
        raise ValueError(
            f"{len(kinds)} feature kinds given for {topology.inputs} inputs"
        )
    rng = np.random.default_rng(seed)
    theta = rng.uniform(-0.5, 0.5, size=topology.n_params)
    zero = Network(
        topology,
        np.zeros((topology.inputs, topology.hidden)),
        np.zeros(topology.hidden),
        np.zeros(topology.hidden),
        0.0,
        tuple(kinds) if kinds is not None else None,
        {"seed": int(seed)},
    )
    return zero.with_params(theta)


def _as_inputs(net: Network, x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim <= 1
    if single:
        x = x.reshape(1, -1)
    if x.ndim != 2 or x.shape[1] != net.topology.inputs:
        raise ValueError(
            f"expected inputs with {net.topology.inputs} columns, got shape {x.shape}"
        )
    return x, single


def forward(net: Network, x):
    """Network output in (0, 1); ``x`` is one feature vector or an ``(N, C)`` batch."""
    x, single = _as_inputs(net, x)
    h = sigmoid(x @ net.w_hidden + net.b_hidden)
    y = sigmoid(h @ net.w_out + net.b_out)
    return float(y[0]) if single else y


def _check_data(x, t) -> tuple[np.ndarray, np.ndarray]:
    t = np.asarray(t, dtype=np.float64).ravel()
    if t.size == 0:
        raise ValueError("dataset is empty")
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if x.shape[0] != t.size:
        raise ValueError(f"{x.shape[0]} inputs but {t.size} targets")
    return x, t


def mse(net: Network, x, t) -> float:
    x, t = _check_data(x, t)
    e = forward(net, x) - t
    return float(np.mean(e * e))


def _residuals_and_jacobian(net: Network, x: np.ndarray, t: np.ndarray):
    h = sigmoid(x @ net.w_hidden + net.b_hidden)  # (N, HN)
    y = sigmoid(h @ net.w_out + net.b_out)  # (N,)
    dy = y * (1.0 - y)
    # d y / d b_hidden[k] = dy * w_out[k] * h_k (1 - h_k)
    dh = (dy[:, None] * net.w_out[None, :]) * h * (1.0 - h)
    n, c = x.shape
    dw = (x[:, :, None] * dh[:, None, :]).reshape(n, -1)  # row-major (C, HN)
    jac = np.concatenate([dw, dh, dy[:, None] * h, dy[:, None]], axis=1)
    return y - t, jac


def jacobian(net: Network, x, t=None) -> np.ndarray:
    """``N x P`` matrix of d(output_i - target_i) / d(theta_j), by backpropagation."""
    x, _ = _as_inputs(net, x)
    if x.shape[0] == 0:
        raise ValueError("dataset is empty")
    _, jac = _residuals_and_jacobian(net, x, np.zeros(x.shape[0]))
    return jac


class _NormalEquations:
    """Damped Gauss-Newton system for one epoch, reused across damping retries.

    ``(J'J + lam I)^-1 J'e == J' (JJ' + lam I)^-1 e``, so the smaller of the two
    Gram matrices is factored.
    """

    def __init__(self, jac: np.ndarray, e: np.ndarray):
        n, p = jac.shape
        self.jac = jac
        self.dual = n < p
        if self.dual:
            self.gram = jac @ jac.T
            self.rhs = e
        else:
            self.gram = jac.T @ jac
            self.rhs = jac.T @ e

    def step(self, lam: float) -> Optional[np.ndarray]:
        a = self.gram.copy()
        a[np.diag_indices_from(a)] += lam
        _, x, info = _posv(a, self.rhs, lower=False, overwrite_a=True)
        if info != 0 or not np.all(np.isfinite(x)):
            return None
        return self.jac.T @ x if self.dual else x


def train_lm(
    net: Network,
    train: tuple,
    val: tuple,
    cfg: TrainConfig = TrainConfig(),
) -> TrainResult:
    """Full-batch Levenberg-Marquardt on the sum of squared errors.

    One epoch is one accepted step; rejected trial steps within an epoch
    raise the damping and retry. Returns the weights with the lowest
    validation MSE seen, including the initial weights.
    """
    xt, tt = _check_data(*train)
    xv, tv = _check_data(*val)
    theta = net.params
    lam = cfg.lambda0

    e, jac = _residuals_and_jacobian(net, xt, tt)
    sse = float(e @ e)
    n = tt.size
    cur_val = mse(net, xv, tv)
    train_hist = [sse / n]
    val_hist = [cur_val]
    best_theta, best_val, best_train, best_epoch = theta, cur_val, sse / n, 0

    stop = "max_epochs"
    epoch = 0
    if sse / n <= cfg.goal_mse:
        stop = "goal"
    else:
        while epoch < cfg.max_epochs:
            accepted = False
            system = _NormalEquations(jac, e)
            while True:
                step = system.step(lam)
                if step is not None:
                    cand = net.with_params(theta - step)
                    e_new, jac_new = _residuals_and_jacobian(cand, xt, tt)
                    sse_new = float(e_new @ e_new)
                    if sse_new < sse:
                        accepted = True
                        break
                lam *= cfg.lambda_up
                if lam > cfg.lambda_max:
                    break
            if not accepted:
                stop = "lambda_max"
                break
            lam /= cfg.lambda_down
            epoch += 1
            net, theta, e, jac, sse = cand, cand.params, e_new, jac_new, sse_new
            cur_val = mse(net, xv, tv)
            train_hist.append(sse / n)
            val_hist.append(cur_val)
            if cur_val < best_val:
                best_theta, best_val, best_train, best_epoch = theta, cur_val, sse / n, epoch
            if sse / n <= cfg.goal_mse:
                stop = "goal"
                break

    final = net.with_params(
        best_theta,
        epochs=epoch,
        best_epoch=best_epoch,
        train_mse=best_train,
        val_mse=best_val,
        stop_reason=stop,
    )
    return TrainResult(final, np.array(train_hist), np.array(val_hist), stop)


# -- persistence --------------------------------------------------------------


def network_to_dict(net: Network) -> dict:
    doc = {
        "format": FORMAT_NAME,
        "format_version": FORMAT_VERSION,
        "topology": {
            "inputs": net.topology.inputs,
            "hidden": net.topology.hidden,
            "outputs": net.topology.outputs,
        },
        "feature_kinds": (
            [k.value for k in net.feature_kinds] if net.feature_kinds is not None else None
        ),
        "normalization": None,
        "w_hidden": net.w_hidden.ravel().tolist(),
        "b_hidden": net.b_hidden.tolist(),
        "w_out": net.w_out.tolist(),
        "b_out": net.b_out,
        "provenance": net.provenance,
    }
    if net.feature_kinds is not None:
        doc["normalization"] = {
            "color_space": "ycbcr-bt601-full-range",
            "ratio_eps": RATIO_EPS,
            "ratio_cap": RATIO_CAP,
            "ranges": {k.value: list(FEATURE_RANGES[k]) for k in net.feature_kinds},
        }
    return doc


def network_from_dict(doc: dict) -> Network:
    if doc.get("format") != FORMAT_NAME:
        raise FormatError(f"not a {FORMAT_NAME} document")
    if doc.get("format_version") != FORMAT_VERSION:
        raise FormatError(f"unsupported model format version {doc.get('format_version')!r}")
    try:
        topo = Topology(**doc["topology"])
        kinds = doc["feature_kinds"]
        return Network(
            topo,
            doc["w_hidden"],
            doc["b_hidden"],
            doc["w_out"],
            doc["b_out"],
            tuple(FeatureKind(k) for k in kinds) if kinds is not None else None,
            dict(doc.get("provenance") or {}),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed model document: {exc}") from exc


def save_network(net: Network, path) -> None:
    # json writes floats with repr(), which round-trips exactly
    Path(path).write_text(json.dumps(network_to_dict(net), indent=1) + "\n")


def load_network(path) -> Network:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    return network_from_dict(doc)


def describe(net: Network) -> str:
    kinds = "+".join(k.label for k in net.feature_kinds) if net.feature_kinds else "stacked"
    return f"{net.topology} [{kinds}]"

