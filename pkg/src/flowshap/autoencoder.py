"""Dense autoencoder trained with mini-batch Adam on reconstruction error.

The network is symmetric only by convention (callers pass the mirrored
widths); hidden layers use ReLU, the output layer is affine so that
standardized (signed) inputs can be reconstructed. Per-sample error is the
mean over features of squared differences, which doubles as the anomaly
score downstream.

Everything runs on float64 numpy and is bit-deterministic for a fixed
(seed, data, config) triple on one platform.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .errors import DataError, NumericalError
from .validation import as_float_matrix, as_float_vector

__all__ = [
    "Autoencoder",
    "TrainReport",
    "AdamState",
    "adam_update",
    "mse",
    "mae",
]

MODEL_FORMAT_VERSION = 1


def mse(x_hat, x) -> float:
    """Mean over features of squared differences."""
    x_hat = as_float_vector(x_hat, "x_hat")
    x = as_float_vector(x, "x")
    if x_hat.shape != x.shape:
        raise ValueError(f"length mismatch: {x_hat.shape} vs {x.shape}")
    return float(np.mean((x_hat - x) ** 2))


def mae(x_hat, x) -> float:
    """Mean over features of absolute differences."""
    x_hat = as_float_vector(x_hat, "x_hat")
    x = as_float_vector(x, "x")
    if x_hat.shape != x.shape:
        raise ValueError(f"length mismatch: {x_hat.shape} vs {x.shape}")
    return float(np.mean(np.abs(x_hat - x)))


def _row_mse(X_hat: np.ndarray, X: np.ndarray) -> np.ndarray:
    return ((X_hat - X) ** 2).mean(axis=1)


@dataclass(frozen=True)
class TrainReport:
    """Per-epoch loss curves (mean per-row reconstruction MSE, no penalty)."""

    train_loss: tuple[float, ...]
    val_loss: tuple[float, ...]
    epochs: int

    def to_dict(self) -> dict:
        return {
            "train_loss": list(self.train_loss),
            "val_loss": list(self.val_loss),
            "epochs": self.epochs,
        }


@dataclass
class AdamState:
    """First/second moment accumulators for a list of parameter arrays."""

    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0

    @classmethod
    def for_params(cls, params: list[np.ndarray]) -> "AdamState":
        return cls(m=[np.zeros_like(p) for p in params],
                   v=[np.zeros_like(p) for p in params])


def adam_update(state: AdamState, params: list[np.ndarray],
                grads: list[np.ndarray], lr: float,
                beta1: float = 0.9, beta2: float = 0.999,
                eps: float = 1e-8) -> list[np.ndarray]:
    """One Adam step; mutates ``state``, returns the updated parameters."""
    if len(params) != len(grads) or any(
        p.shape != g.shape for p, g in zip(params, grads)
    ):
        raise ValueError("parameter and gradient shapes do not match")
    state.t += 1
    bc1 = 1.0 - beta1 ** state.t
    bc2 = 1.0 - beta2 ** state.t
    updated = []
    for i, (p, g) in enumerate(zip(params, grads)):
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g * g
        m_hat = state.m[i] / bc1
        v_hat = state.v[i] / bc2
        updated.append(p - lr * m_hat / (np.sqrt(v_hat) + eps))
    return updated


class Autoencoder(BaseEstimator):
    """Feed-forward autoencoder with an sklearn-style interface.

    Parameters
    ----------
    hidden_layers : tuple of int
        Widths of the hidden layers between the (equal) input and output
        sizes, e.g. ``(70, 30, 10, 30, 70)``.
    learning_rate, l2, epochs, batch_size : training hyperparameters.
        The L2 penalty applies to weights only, never biases.
    seed : int
        Drives weight init and the per-epoch shuffles deterministically.
    """

    def __init__(self, hidden_layers=(70, 30, 10, 30, 70),
                 learning_rate: float = 1e-3, l2: float = 1e-3,
                 epochs: int = 100, batch_size: int = 8192,
                 hidden_activation: str = "relu",
                 output_activation: str = "linear", seed: int = 0):
        self.hidden_layers = hidden_layers
        self.learning_rate = learning_rate
        self.l2 = l2
        self.epochs = epochs
        self.batch_size = batch_size
        self.hidden_activation = hidden_activation
        self.output_activation = output_activation
        self.seed = seed

    # -- construction ------------------------------------------------

    def _validate_params(self):
        if self.hidden_activation != "relu":
            raise ValueError(f"unsupported hidden activation {self.hidden_activation!r}")
        if self.output_activation != "linear":
            raise ValueError(f"unsupported output activation {self.output_activation!r}")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if any(int(w) < 1 for w in self.hidden_layers):
            raise ValueError("hidden layer widths must be >= 1")

    def initialize(self, n_features: int) -> "Autoencoder":
        """Deterministically initialize weights for ``n_features`` inputs.

        Fan-in-scaled uniform init (ReLU-friendly); biases start at zero.
        """
        self._validate_params()
        if n_features < 1:
            raise ValueError("n_features must be >= 1")
        sizes = [int(n_features)] + [int(w) for w in self.hidden_layers] + [int(n_features)]
        rng = np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(0,)))
        self.layer_sizes_ = tuple(sizes)
        self.weights_ = []
        self.biases_ = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            limit = np.sqrt(6.0 / fan_in)
            self.weights_.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
            self.biases_.append(np.zeros(fan_out))
        self.activations_ = ["relu"] * (len(sizes) - 2) + ["linear"]
        self.n_features_in_ = int(n_features)
        self.trained_ = False
        return self

    def _check_initialized(self):
        if not hasattr(self, "weights_"):
            raise NotFittedError("Autoencoder has no weights; call initialize() or fit()")

    def _check_trained(self):
        self._check_initialized()
        if not getattr(self, "trained_", False):
            raise NotFittedError("Autoencoder is not trained; call fit()")

    # -- forward / scoring -------------------------------------------

    def _forward(self, X: np.ndarray, keep: bool = False):
        """Return the reconstruction; with ``keep`` also pre/post activations."""
        pre, post = [], [X]
        out = X
        last = len(self.weights_) - 1
        for l, (W, b) in enumerate(zip(self.weights_, self.biases_)):
            z = out @ W.T + b
            out = z if l == last else np.maximum(z, 0.0)
            if keep:
                pre.append(z)
                post.append(out)
        if keep:
            return out, pre, post
        return out

    def reconstruct(self, X) -> np.ndarray:
        """Forward pass: reconstructed rows, same shape as the input."""
        self._check_initialized()
        single = np.asarray(X).ndim == 1
        X = as_float_matrix(X[None, :] if single else X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"input has {X.shape[1]} features, model expects {self.n_features_in_}"
            )
        out = self._forward(X)
        return out[0] if single else out

    def reconstruction_errors(self, X) -> np.ndarray:
        """Per-row anomaly scores: mean squared reconstruction error."""
        self._check_trained()
        X = as_float_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"input has {X.shape[1]} features, model expects {self.n_features_in_}"
            )
        return _row_mse(self._forward(X), X)

    # -- objective / gradients ---------------------------------------

    def objective(self, X, l2: float | None = None) -> float:
        """Training objective on a batch: mean row MSE + l2 * sum of W**2."""
        self._check_initialized()
        X = as_float_matrix(X)
        l2 = self.l2 if l2 is None else l2
        data = float(_row_mse(self._forward(X), X).mean())
        penalty = l2 * sum(float((W ** 2).sum()) for W in self.weights_)
        return data + penalty

    def gradients(self, X, l2: float | None = None):
        """Exact reverse-mode gradients of :meth:`objective` on ``X``.

        ReLU subgradient at exactly zero is taken as zero. Returns
        (weight_grads, bias_grads) matching the layer shapes.
        """
        self._check_initialized()
        X = as_float_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"batch has {X.shape[1]} features, model expects {self.n_features_in_}"
            )
        l2 = self.l2 if l2 is None else l2
        n, d = X.shape
        out, pre, post = self._forward(X, keep=True)
        d_out = (2.0 / (n * d)) * (out - X)
        w_grads = [None] * len(self.weights_)
        b_grads = [None] * len(self.weights_)
        last = len(self.weights_) - 1
        delta = d_out
        for l in range(last, -1, -1):
            if l != last:
                delta = delta * (pre[l] > 0.0)
            w_grads[l] = delta.T @ post[l] + 2.0 * l2 * self.weights_[l]
            b_grads[l] = delta.sum(axis=0)
            if l:
                delta = delta @ self.weights_[l]
        return w_grads, b_grads

    # -- training ----------------------------------------------------

    def fit(self, X, y=None, validation_data=None):
        """Train with mini-batch Adam for ``epochs`` epochs.

        ``validation_data`` (optional matrix) is scored at every epoch end;
        there is no early stopping. Loss curves hold the plain per-row MSE
        without the weight penalty.
        """
        X = as_float_matrix(X)
        if X.shape[0] == 0:
            raise DataError("training set is empty")
        X_val = None if validation_data is None else as_float_matrix(validation_data)
        self.initialize(X.shape[1])
        if X_val is not None and X_val.shape[1] != self.n_features_in_:
            raise ValueError(
                f"validation set has {X_val.shape[1]} features, expected "
                f"{self.n_features_in_}"
            )

        shuffle_rng = np.random.default_rng(
            np.random.SeedSequence(self.seed, spawn_key=(1,))
        )
        params = self.weights_ + self.biases_
        state = AdamState.for_params(params)
        n_w = len(self.weights_)
        n = X.shape[0]
        train_curve, val_curve = [], []
        for epoch in range(int(self.epochs)):
            perm = shuffle_rng.permutation(n)
            for start in range(0, n, int(self.batch_size)):
                batch = X[perm[start:start + int(self.batch_size)]]
                w_grads, b_grads = self.gradients(batch)
                params = adam_update(state, params, w_grads + b_grads,
                                     lr=self.learning_rate)
                self.weights_ = params[:n_w]
                self.biases_ = params[n_w:]
            train_loss = float(_row_mse(self._forward(X), X).mean())
            if not np.isfinite(train_loss):
                raise NumericalError(
                    f"non-finite training loss at epoch {epoch + 1}; "
                    "lower the learning rate or check input scaling"
                )
            train_curve.append(train_loss)
            if X_val is not None:
                val_curve.append(float(_row_mse(self._forward(X_val), X_val).mean()))
        self.trained_ = True
        self.train_report_ = TrainReport(tuple(train_curve), tuple(val_curve),
                                         int(self.epochs))
        return self

    # -- persistence --------------------------------------------------

    def to_dict(self) -> dict:
        """Versioned JSON form; weight matrices stored row-major."""
        self._check_initialized()
        return {
            "version": MODEL_FORMAT_VERSION,
            "layer_sizes": list(self.layer_sizes_),
            "activations": list(self.activations_),
            "weights": [W.ravel(order="C").tolist() for W in self.weights_],
            "biases": [b.tolist() for b in self.biases_],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "Autoencoder":
        if obj.get("version") != MODEL_FORMAT_VERSION:
            raise DataError(f"unsupported model format version {obj.get('version')!r}")
        sizes = [int(s) for s in obj["layer_sizes"]]
        model = cls(hidden_layers=tuple(sizes[1:-1]))
        model.layer_sizes_ = tuple(sizes)
        model.activations_ = [str(a) for a in obj["activations"]]
        model.weights_ = []
        model.biases_ = []
        for flat, bias, fan_in, fan_out in zip(obj["weights"], obj["biases"],
                                               sizes[:-1], sizes[1:]):
            W = np.asarray(flat, dtype=np.float64).reshape(fan_out, fan_in)
            model.weights_.append(W)
            model.biases_.append(np.asarray(bias, dtype=np.float64))
        model.n_features_in_ = sizes[0]
        # persisted models are scoring artifacts produced after training
        model.trained_ = True
        return model

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "Autoencoder":
        try:
            obj = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read model file {path}: {exc}") from exc
        return cls.from_dict(obj)
