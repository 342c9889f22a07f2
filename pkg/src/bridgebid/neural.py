"""Policy-value MLP with hand-written reverse-mode gradients.

A rectifier trunk feeding a masked-softmax policy head and a scalar value
head, all in numpy. Training arithmetic is float32; float64 parameters are
supported for finite-difference gradient verification. Parameters are plain
arrays, updates are functional (``adam_step`` returns new parameters), and
checkpoints are a small binary format with a JSON header.

Parameter order, used by checkpoints, gradients, and Adam state alike:
trunk W0, b0, ..., W{L-1}, b{L-1}, policy W, policy b, value W, value b.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, DataError, NumericError

CHECKPOINT_MAGIC = b"BRLC"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class NetConfig:
    input_width: int
    policy_width: int
    hidden_width: int = 1024
    hidden_layers: int = 4
    activation: str = "relu"

    def __post_init__(self) -> None:
        if min(self.input_width, self.policy_width, self.hidden_width) < 1:
            raise ContractViolation("network widths must be positive")
        if self.hidden_layers < 1:
            raise ContractViolation("need at least one hidden layer")
        if self.activation != "relu":
            raise ContractViolation(f"unsupported activation {self.activation!r}")

    def shapes(self) -> list[tuple[int, ...]]:
        """Array shapes in the documented parameter order."""
        out: list[tuple[int, ...]] = []
        fan_in = self.input_width
        for _ in range(self.hidden_layers):
            out += [(fan_in, self.hidden_width), (self.hidden_width,)]
            fan_in = self.hidden_width
        out += [(fan_in, self.policy_width), (self.policy_width,)]
        out += [(fan_in, 1), (1,)]
        return out


@dataclass
class PolicyValueParams:
    config: NetConfig
    trunk: list[tuple[np.ndarray, np.ndarray]]
    policy: tuple[np.ndarray, np.ndarray]
    value: tuple[np.ndarray, np.ndarray]

    @property
    def dtype(self):
        return self.trunk[0][0].dtype

    def copy(self) -> "PolicyValueParams":
        return PolicyValueParams(
            config=self.config,
            trunk=[(W.copy(), b.copy()) for W, b in self.trunk],
            policy=(self.policy[0].copy(), self.policy[1].copy()),
            value=(self.value[0].copy(), self.value[1].copy()),
        )


def init_params(config: NetConfig, seed: int, dtype=np.float32) -> PolicyValueParams:
    """He fan-in init for the trunk, 100x smaller gain for the two heads."""
    rng = np.random.default_rng(seed)

    def dense(fan_in, fan_out, gain):
        scale = gain * np.sqrt(2.0 / fan_in)
        W = rng.normal(0.0, scale, size=(fan_in, fan_out)).astype(dtype)
        return W, np.zeros(fan_out, dtype=dtype)

    trunk = []
    fan_in = config.input_width
    for _ in range(config.hidden_layers):
        trunk.append(dense(fan_in, config.hidden_width, 1.0))
        fan_in = config.hidden_width
    return PolicyValueParams(
        config=config,
        trunk=trunk,
        policy=dense(fan_in, config.policy_width, 0.01),
        value=dense(fan_in, 1, 0.01),
    )


def param_list(params: PolicyValueParams) -> list[np.ndarray]:
    out = []
    for W, b in params.trunk:
        out += [W, b]
    out += [params.policy[0], params.policy[1], params.value[0], params.value[1]]
    return out


def params_from_list(config: NetConfig, arrays) -> PolicyValueParams:
    arrays = list(arrays)
    expected = config.shapes()
    if len(arrays) != len(expected):
        raise DataError(f"expected {len(expected)} parameter arrays, got {len(arrays)}")
    for array, shape in zip(arrays, expected):
        if tuple(array.shape) != shape:
            raise DataError(f"parameter shape {array.shape} does not match {shape}")
    trunk = [
        (arrays[2 * i], arrays[2 * i + 1]) for i in range(config.hidden_layers)
    ]
    return PolicyValueParams(
        config=config,
        trunk=trunk,
        policy=(arrays[-4], arrays[-3]),
        value=(arrays[-2], arrays[-1]),
    )


# ---------------------------------------------------------------------------
# Forward pass
# ---------------------------------------------------------------------------


def _as_batch(bits, mask, dtype):
    x = np.asarray(bits, dtype=dtype)
    m = np.asarray(mask, dtype=bool)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[None, :]
        m = m[None, :]
    return x, m, squeeze


def _forward_cache(params: PolicyValueParams, x: np.ndarray, mask: np.ndarray):
    if not mask.any(axis=1).all():
        raise ContractViolation("observation with no legal action cannot be scored")
    acts = [x]
    h = x
    for W, b in params.trunk:
        h = np.maximum(h @ W + b, 0)
        acts.append(h)
    logits = h @ params.policy[0] + params.policy[1]
    value = (h @ params.value[0]).reshape(-1) + params.value[1][0]
    # Illegal actions get a -inf logit, so exp() makes them exactly 0 and
    # they stay exactly 0 through normalization. Log-probabilities come from
    # the shifted logits directly, not log(probs): a sharp policy can push a
    # legal action's probability below float32 resolution, and log(0) would
    # poison the PPO ratio even though shifted - log(sum) is still finite.
    masked = np.where(mask, logits, -np.inf)
    shifted = masked - masked.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    total = exp.sum(axis=1, keepdims=True)
    probs = exp / total
    log_probs = shifted - np.log(total)
    return probs, value, acts, log_probs


def forward(params: PolicyValueParams, bits, mask):
    """Masked policy distribution and state value.

    Accepts a single observation (1-D) or a batch (2-D); shapes of the
    results follow the input. Illegal actions have probability exactly 0.
    """
    x, m, squeeze = _as_batch(bits, mask, params.dtype)
    probs, value, _, _ = _forward_cache(params, x, m)
    if squeeze:
        return probs[0], float(value[0])
    return probs, value


def forward_with_logs(params: PolicyValueParams, bits, mask):
    """Batch forward that also returns stable log-probabilities.

    Rollout collection stores the sampled action's log-probability; using
    the same computation here and in the loss keeps fresh-buffer PPO ratios
    exactly 1. Illegal actions report -inf.
    """
    x, m, _ = _as_batch(bits, mask, params.dtype)
    probs, value, _, log_probs = _forward_cache(params, x, m)
    return probs, value, log_probs


# ---------------------------------------------------------------------------
# Losses
# ---------------------------------------------------------------------------


@dataclass
class SlBatch:
    """Behavior-cloning targets: observed states and the action taken."""

    bits: np.ndarray
    masks: np.ndarray
    actions: np.ndarray


@dataclass
class PpoBatch:
    """One minibatch of transitions plus the PPO loss settings."""

    bits: np.ndarray
    masks: np.ndarray
    actions: np.ndarray
    old_log_probs: np.ndarray
    advantages: np.ndarray
    returns: np.ndarray
    clip_eps: float = 0.2
    value_coef: float = 0.5
    entropy_coef: float = 0.01
    old_values: np.ndarray | None = None
    value_clip: float | None = None  # requires old_values when set


def loss_and_grad(params: PolicyValueParams, batch):
    """Scalar loss, gradients in parameter order, and a stats dict."""
    if isinstance(batch, SlBatch):
        return _sl_loss_and_grad(params, batch)
    if isinstance(batch, PpoBatch):
        return _ppo_loss_and_grad(params, batch)
    raise ContractViolation(f"unknown batch type {type(batch).__name__}")


def _check_finite(per_sample: np.ndarray, what: str) -> None:
    bad = np.flatnonzero(~np.isfinite(per_sample))
    if bad.size:
        raise NumericError(
            f"non-finite {what} at batch index {int(bad[0])}"
        )


def _backward(params, acts, dlogits, dvalue):
    """Reverse pass given head-output gradients; returns parameter order."""
    h_last = acts[-1]
    g_policy_W = h_last.T @ dlogits
    g_policy_b = dlogits.sum(axis=0)
    g_value_W = h_last.T @ dvalue[:, None]
    g_value_b = np.array([dvalue.sum()], dtype=h_last.dtype)
    dh = dlogits @ params.policy[0].T + dvalue[:, None] @ params.value[0].T
    trunk_grads = [None] * len(params.trunk)
    for i in range(len(params.trunk) - 1, -1, -1):
        W, _ = params.trunk[i]
        dpre = dh * (acts[i + 1] > 0)
        trunk_grads[i] = (acts[i].T @ dpre, dpre.sum(axis=0))
        dh = dpre @ W.T
    grads = []
    for gW, gb in trunk_grads:
        grads += [gW, gb]
    grads += [g_policy_W, g_policy_b, g_value_W, g_value_b]
    return grads


def _sl_loss_and_grad(params, batch: SlBatch):
    if len(batch.bits) == 0:
        raise ContractViolation("empty batch")
    x, masks, _ = _as_batch(batch.bits, batch.masks, params.dtype)
    actions = np.asarray(batch.actions)
    probs, _, acts, log_probs = _forward_cache(params, x, masks)
    n = len(actions)
    log_p = log_probs[np.arange(n), actions]
    _check_finite(log_p, "cross-entropy")
    loss = -log_p.mean()
    dlogits = probs.copy()
    dlogits[np.arange(n), actions] -= 1.0
    dlogits /= n
    grads = _backward(params, acts, dlogits, np.zeros(n, dtype=x.dtype))
    accuracy = float((probs.argmax(axis=1) == actions).mean())
    return float(loss), grads, {"loss": float(loss), "accuracy": accuracy}


def _entropy_terms(probs):
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(probs > 0, probs * np.log(probs), 0.0)
        logp = np.where(probs > 0, np.log(probs), 0.0)
    entropy = -plogp.sum(axis=1)
    return entropy, logp


def _ppo_loss_and_grad(params, batch: PpoBatch):
    if len(batch.bits) == 0:
        raise ContractViolation("empty batch")
    if batch.value_clip is not None and batch.old_values is None:
        raise ContractViolation("value clipping needs the old value predictions")
    x, masks, _ = _as_batch(batch.bits, batch.masks, params.dtype)
    actions = np.asarray(batch.actions)
    advantages = np.asarray(batch.advantages, dtype=x.dtype)
    returns = np.asarray(batch.returns, dtype=x.dtype)
    old_log_probs = np.asarray(batch.old_log_probs, dtype=x.dtype)
    n = len(actions)

    probs, value, acts, log_probs = _forward_cache(params, x, masks)
    log_p = log_probs[np.arange(n), actions]
    _check_finite(log_p, "log-probability")
    log_ratio = log_p - old_log_probs
    ratio = np.exp(log_ratio)
    clipped_ratio = np.clip(ratio, 1.0 - batch.clip_eps, 1.0 + batch.clip_eps)
    surr_plain = ratio * advantages
    surr_clip = clipped_ratio * advantages
    per_sample_pg = -np.minimum(surr_plain, surr_clip)
    _check_finite(per_sample_pg, "policy surrogate")
    pg_loss = per_sample_pg.mean()

    if batch.value_clip is not None:
        old_values = np.asarray(batch.old_values, dtype=x.dtype)
        v_clipped = old_values + np.clip(
            value - old_values, -batch.value_clip, batch.value_clip
        )
        sq_plain = (value - returns) ** 2
        sq_clip = (v_clipped - returns) ** 2
        clip_branch = sq_clip > sq_plain
        per_sample_v = 0.5 * np.maximum(sq_plain, sq_clip)
        inside = np.abs(value - old_values) < batch.value_clip
        dv_branch = np.where(clip_branch, (v_clipped - returns) * inside, value - returns)
    else:
        per_sample_v = 0.5 * (value - returns) ** 2
        dv_branch = value - returns
    _check_finite(per_sample_v, "value loss")
    value_loss = per_sample_v.mean()

    entropy, logp_all = _entropy_terms(probs)
    entropy_mean = entropy.mean()
    loss = pg_loss + batch.value_coef * value_loss - batch.entropy_coef * entropy_mean
    if not np.isfinite(loss):
        raise NumericError("non-finite total loss at batch index 0")

    # d(pg)/dlogits: the unclipped branch carries -A * r through log-prob;
    # the clipped branch is constant in the parameters.
    unclipped_active = surr_plain <= surr_clip
    coef = np.where(unclipped_active, -advantages * ratio, 0.0) / n
    dlogits = probs * -coef[:, None]
    dlogits[np.arange(n), actions] += coef
    # Entropy bonus: d(-c*H)/dlogit_j = c * p_j * (log p_j + H).
    dlogits += (batch.entropy_coef / n) * probs * (logp_all + entropy[:, None])
    dvalue = (batch.value_coef / n) * dv_branch.astype(x.dtype)

    grads = _backward(params, acts, dlogits, dvalue)
    clip_frac = float((np.abs(ratio - 1.0) > batch.clip_eps).mean())
    # (r - 1) - log r from the log-ratio; ratio itself can underflow to 0
    approx_kl = float(((ratio - 1.0) - log_ratio).mean())
    stats = {
        "loss": float(loss),
        "policy_loss": float(pg_loss),
        "value_loss": float(value_loss),
        "entropy": float(entropy_mean),
        "clip_frac": clip_frac,
        "approx_kl": approx_kl,
    }
    return float(loss), grads, stats


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------


@dataclass
class AdamState:
    lr: float
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    clip_norm: float | None = 0.5
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)


def init_adam(params: PolicyValueParams, lr: float, clip_norm: float | None = 0.5) -> AdamState:
    arrays = param_list(params)
    return AdamState(
        lr=lr,
        clip_norm=clip_norm,
        m=[np.zeros_like(a) for a in arrays],
        v=[np.zeros_like(a) for a in arrays],
    )


def adam_step(params: PolicyValueParams, grads, state: AdamState):
    """One bias-corrected Adam update after global-norm gradient clipping.

    Returns fresh (params, state); the inputs are not mutated.
    """
    arrays = param_list(params)
    if len(grads) != len(arrays):
        raise ContractViolation("gradient list does not match parameter list")
    total_sq = sum(float((g.astype(np.float64) ** 2).sum()) for g in grads)
    norm = np.sqrt(total_sq)
    if not np.isfinite(norm):
        raise NumericError("non-finite gradient norm")
    scale = 1.0
    if state.clip_norm is not None and norm > state.clip_norm:
        scale = state.clip_norm / norm

    step = state.step + 1
    bias1 = 1.0 - state.beta1**step
    bias2 = 1.0 - state.beta2**step
    new_arrays, new_m, new_v = [], [], []
    for a, g, m, v in zip(arrays, grads, state.m, state.v):
        g = g * scale
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * g * g
        update = state.lr * (m / bias1) / (np.sqrt(v / bias2) + state.eps)
        new_arrays.append((a - update).astype(a.dtype))
        new_m.append(m.astype(a.dtype))
        new_v.append(v.astype(a.dtype))
    new_params = params_from_list(params.config, new_arrays)
    new_state = AdamState(
        lr=state.lr,
        step=step,
        beta1=state.beta1,
        beta2=state.beta2,
        eps=state.eps,
        clip_norm=state.clip_norm,
        m=new_m,
        v=new_v,
    )
    return new_params, new_state


# ---------------------------------------------------------------------------
# Checkpoints: magic, version u32, meta-length u32, JSON metadata, then the
# parameter arrays as little-endian float32 in the documented order (Adam
# moments appended when present). Little-endian u32 header fields.
# ---------------------------------------------------------------------------


@dataclass
class Checkpoint:
    params: PolicyValueParams
    provenance: dict
    adam: AdamState | None = None


def store_checkpoint(checkpoint: Checkpoint, path) -> None:
    params = checkpoint.params
    config = params.config
    meta = {
        "config": {
            "input_width": config.input_width,
            "policy_width": config.policy_width,
            "hidden_width": config.hidden_width,
            "hidden_layers": config.hidden_layers,
            "activation": config.activation,
        },
        "provenance": checkpoint.provenance,
        "shapes": [list(s) for s in config.shapes()],
        "has_adam": checkpoint.adam is not None,
    }
    if checkpoint.adam is not None:
        adam = checkpoint.adam
        meta["adam"] = {
            "lr": adam.lr,
            "step": adam.step,
            "beta1": adam.beta1,
            "beta2": adam.beta2,
            "eps": adam.eps,
            "clip_norm": adam.clip_norm,
        }
    meta_bytes = json.dumps(meta).encode("utf-8")
    payload = [a.astype("<f4").tobytes() for a in param_list(params)]
    if checkpoint.adam is not None:
        payload += [a.astype("<f4").tobytes() for a in checkpoint.adam.m]
        payload += [a.astype("<f4").tobytes() for a in checkpoint.adam.v]
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<II", CHECKPOINT_VERSION, len(meta_bytes)))
        fh.write(meta_bytes)
        for chunk in payload:
            fh.write(chunk)


def load_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 12 or blob[:4] != CHECKPOINT_MAGIC:
        raise DataError("not a checkpoint file (bad magic)")
    version, meta_len = struct.unpack("<II", blob[4:12])
    if version != CHECKPOINT_VERSION:
        raise DataError(
            f"checkpoint version {version} unsupported (expected {CHECKPOINT_VERSION})"
        )
    if len(blob) < 12 + meta_len:
        raise DataError("checkpoint truncated inside metadata")
    try:
        meta = json.loads(blob[12 : 12 + meta_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataError(f"checkpoint metadata unreadable: {exc}") from None
    try:
        config = NetConfig(**meta["config"])
    except (KeyError, TypeError) as exc:
        raise DataError(f"checkpoint config invalid: {exc}") from None
    shapes = config.shapes()
    if [list(s) for s in shapes] != meta.get("shapes"):
        raise DataError("checkpoint shape table does not match its config")
    has_adam = bool(meta.get("has_adam"))
    copies = 3 if has_adam else 1
    counts = [int(np.prod(s)) for s in shapes]
    expected_bytes = 4 * sum(counts) * copies
    body = blob[12 + meta_len :]
    if len(body) != expected_bytes:
        raise DataError(
            f"checkpoint payload is {len(body)} bytes, expected {expected_bytes}"
        )

    def take(offset):
        arrays = []
        for shape, count in zip(shapes, counts):
            a = np.frombuffer(body, dtype="<f4", count=count, offset=offset)
            arrays.append(a.reshape(shape).copy())
            offset += 4 * count
        return arrays, offset

    arrays, offset = take(0)
    params = params_from_list(config, arrays)
    adam = None
    if has_adam:
        m, offset = take(offset)
        v, offset = take(offset)
        entry = meta["adam"]
        adam = AdamState(
            lr=entry["lr"],
            step=entry["step"],
            beta1=entry["beta1"],
            beta2=entry["beta2"],
            eps=entry["eps"],
            clip_norm=entry["clip_norm"],
            m=m,
            v=v,
        )
    return Checkpoint(params=params, provenance=meta["provenance"], adam=adam)
