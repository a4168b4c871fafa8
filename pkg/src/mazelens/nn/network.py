"""Fixed Impala-style policy network: layout, forward pass with
activation capture, and analytic backward pass to the input image.

The architecture is three blocks of conv -> maxpool -> two residual
units, then relu / flatten / hidden dense / relu and two heads (15
policy logits, 1 value). The layer graph is fixed, so the backward pass
is a hand-rolled reverse traversal of a tape recorded during forward:
relu masks, pool argmax routing and conv transposes. No general
autodiff.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ParameterError, ShapeMismatchError, TargetRangeError, UnknownLayerError
from . import ops

NUM_ACTIONS = 15


@dataclass(frozen=True)
class LayerSpec:
    """One named layer: kind plus its declared output shape."""

    name: str
    kind: str  # conv | maxpool | relu | resadd | flatten | dense
    out_shape: tuple[int, ...]
    # parameterized layers only
    kernel_shape: tuple[int, ...] = ()
    bias_shape: tuple[int, ...] = ()

    @property
    def parameterized(self) -> bool:
        return bool(self.kernel_shape)


@dataclass(frozen=True)
class NetworkSpec:
    """Declarative layout of the policy network.

    Channel widths, hidden width and action count are constructor
    parameters so that externally supplied weights define the truth;
    the defaults are the canonical 64/128/128 ladder with a 256-wide
    hidden dense. Immutable after construction, safe to share.
    """

    input_shape: tuple[int, int, int] = (3, 64, 64)
    channels: tuple[int, int, int] = (64, 128, 128)
    hidden: int = 256
    actions: int = NUM_ACTIONS
    layers: tuple[LayerSpec, ...] = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "layers", tuple(self._build()))
        self._validate()

    def _build(self) -> list[LayerSpec]:
        c, h, w = self.input_shape
        layers: list[LayerSpec] = []
        for b, width in enumerate(self.channels, start=1):
            layers.append(
                LayerSpec(
                    f"block{b}.conv",
                    "conv",
                    (width, h, w),
                    kernel_shape=(width, c, 3, 3),
                    bias_shape=(width,),
                )
            )
            c = width
            h, w = -(-h // 2), -(-w // 2)
            layers.append(LayerSpec(f"block{b}.maxpool", "maxpool", (c, h, w)))
            for u in (1, 2):
                prefix = f"block{b}.res{u}"
                layers.append(LayerSpec(f"{prefix}.relu1", "relu", (c, h, w)))
                layers.append(
                    LayerSpec(
                        f"{prefix}.conv1",
                        "conv",
                        (c, h, w),
                        kernel_shape=(c, c, 3, 3),
                        bias_shape=(c,),
                    )
                )
                layers.append(LayerSpec(f"{prefix}.relu2", "relu", (c, h, w)))
                layers.append(
                    LayerSpec(
                        f"{prefix}.conv2",
                        "conv",
                        (c, h, w),
                        kernel_shape=(c, c, 3, 3),
                        bias_shape=(c,),
                    )
                )
                layers.append(LayerSpec(f"{prefix}.resadd", "resadd", (c, h, w)))
        layers.append(LayerSpec("final.relu", "relu", (c, h, w)))
        flat = c * h * w
        layers.append(LayerSpec("final.flatten", "flatten", (flat,)))
        layers.append(
            LayerSpec(
                "final.fc",
                "dense",
                (self.hidden,),
                kernel_shape=(self.hidden, flat),
                bias_shape=(self.hidden,),
            )
        )
        layers.append(LayerSpec("final.relu2", "relu", (self.hidden,)))
        layers.append(
            LayerSpec(
                "head.policy",
                "dense",
                (self.actions,),
                kernel_shape=(self.actions, self.hidden),
                bias_shape=(self.actions,),
            )
        )
        layers.append(
            LayerSpec(
                "head.value",
                "dense",
                (1,),
                kernel_shape=(1, self.hidden),
                bias_shape=(1,),
            )
        )
        return layers

    def _validate(self) -> None:
        convs = [l for l in self.layers if l.kind == "conv"]
        if len(convs) != 15:
            raise ShapeMismatchError(f"expected 15 conv layers, built {len(convs)}")
        if self.layer("head.policy").out_shape != (self.actions,):
            raise ShapeMismatchError("policy head arity mismatch")
        if self.layer("head.value").out_shape != (1,):
            raise ShapeMismatchError("value head must emit one scalar")

    @property
    def layer_names(self) -> tuple[str, ...]:
        return tuple(l.name for l in self.layers)

    def layer(self, name: str) -> LayerSpec:
        for l in self.layers:
            if l.name == name:
                return l
        raise UnknownLayerError(
            f"unknown layer {name!r}; valid names: {', '.join(self.layer_names)}"
        )

    @property
    def parameterized_layers(self) -> tuple[LayerSpec, ...]:
        return tuple(l for l in self.layers if l.parameterized)


@dataclass
class ActivationTrace:
    """Captured tensors from one forward pass plus heads and the tape
    the backward pass replays. Owned by its evaluation; no shared
    mutable state."""

    spec: NetworkSpec
    input: np.ndarray  # (3, 64, 64) float32
    layers: dict[str, np.ndarray]
    logits: np.ndarray  # (actions,) float32
    value: float
    _tape: list[tuple] = field(default_factory=list, repr=False)
    _policy_kernel: np.ndarray | None = field(default=None, repr=False)

    def layer(self, name: str) -> np.ndarray:
        if name not in self.layers:
            raise UnknownLayerError(
                f"layer {name!r} was not captured; captured: {sorted(self.layers)}"
            )
        return self.layers[name]

    def channel_image(self, name: str, channel: int) -> np.ndarray:
        """Single-channel feature map (H, W) of a captured spatial layer."""
        t = self.layer(name)
        if t.ndim != 3:
            raise ShapeMismatchError(f"layer {name!r} is not spatial: shape {t.shape}")
        if not 0 <= channel < t.shape[0]:
            raise ParameterError(
                f"channel {channel} out of range for {name!r} with {t.shape[0]} channels"
            )
        return t[channel]


def _run_network(
    spec: NetworkSpec,
    weights,
    x: np.ndarray,
    capture: frozenset[str],
    record_tape: bool,
):
    """Shared forward interpreter.

    Dtype-preserving: feeding float64 arrays evaluates the whole pipeline
    in float64 (test oracles rely on this). Returns
    (captured, logits, value_vec, tape).
    """
    captured: dict[str, np.ndarray] = {}
    tape: list[tuple] = []
    skip_stack: list[np.ndarray] = []

    def push(entry: tuple) -> None:
        if record_tape:
            tape.append(entry)

    t = x
    for layer in spec.layers:
        if layer.name.startswith("head."):
            break
        kind = layer.kind
        if kind == "relu" and layer.name.endswith(".relu1"):
            # entry of a residual unit: the skip branch leaves here
            skip_stack.append(t)
            push(("unit_begin",))
        if kind == "conv":
            k = weights.kernel(layer.name).astype(t.dtype, copy=False)
            b = weights.bias(layer.name).astype(t.dtype, copy=False)
            t = ops.conv2d_forward(t, k, b)
            push(("conv", k))
        elif kind == "maxpool":
            in_shape = t.shape
            t, argmax = ops.maxpool_forward(t)
            push(("maxpool", argmax, in_shape))
        elif kind == "relu":
            mask = t > 0
            t = ops.relu_forward(t)
            push(("relu", mask))
        elif kind == "resadd":
            t = ops.resadd_forward(t, skip_stack.pop())
            push(("resadd",))
        elif kind == "flatten":
            push(("flatten", t.shape))
            t = ops.flatten_forward(t)
        elif kind == "dense":
            k = weights.kernel(layer.name).astype(t.dtype, copy=False)
            b = weights.bias(layer.name).astype(t.dtype, copy=False)
            t = ops.dense_forward(t, k, b)
            push(("dense", k))
        else:  # pragma: no cover - spec builder emits no other kinds
            raise ShapeMismatchError(f"unhandled layer kind {kind!r}")
        if layer.name in capture:
            captured[layer.name] = t.copy()

    if skip_stack:  # pragma: no cover - guards the interpreter itself
        raise ShapeMismatchError("unbalanced residual units in layer list")

    pk = weights.kernel("head.policy").astype(t.dtype, copy=False)
    pb = weights.bias("head.policy").astype(t.dtype, copy=False)
    vk = weights.kernel("head.value").astype(t.dtype, copy=False)
    vb = weights.bias("head.value").astype(t.dtype, copy=False)
    logits = ops.dense_forward(t, pk, pb)
    value = ops.dense_forward(t, vk, vb)
    if "head.policy" in capture:
        captured["head.policy"] = logits.copy()
    if "head.value" in capture:
        captured["head.value"] = value.copy()
    return captured, logits, value, tape


def evaluate_logits(spec: NetworkSpec, weights, x: np.ndarray) -> np.ndarray:
    """Logits-only forward without trace bookkeeping.

    Preserves the input dtype: float32 observations run the standard
    path, float64 inputs evaluate the whole pipeline in float64 (the
    finite-difference oracles need that headroom at eps=1e-3).
    """
    x = np.asarray(x)
    if x.dtype not in (np.float32, np.float64):
        x = x.astype(np.float32)
    if x.shape != spec.input_shape:
        raise ShapeMismatchError(
            f"input shape {x.shape} does not match network input {spec.input_shape}"
        )
    _, logits, _, _ = _run_network(spec, weights, x, frozenset(), False)
    return logits


def forward_with_capture(
    spec: NetworkSpec,
    weights,
    x: np.ndarray,
    capture=(),
) -> ActivationTrace:
    """Run the network on a (3, 64, 64) observation, capturing the named
    layers. The trace always carries logits and value, and retains the
    tape needed by backward_to_input. Identical (weights, input) give a
    bitwise-identical trace.
    """
    capture_set = frozenset(capture)
    unknown = capture_set - set(spec.layer_names)
    if unknown:
        raise UnknownLayerError(
            f"unknown capture layer(s) {sorted(unknown)}; "
            f"valid names: {', '.join(spec.layer_names)}"
        )
    x = np.asarray(x, dtype=np.float32)
    if x.shape != spec.input_shape:
        raise ShapeMismatchError(
            f"input shape {x.shape} does not match network input {spec.input_shape}"
        )
    captured, logits, value, tape = _run_network(spec, weights, x, capture_set, True)
    for name, tensor in captured.items():
        declared = spec.layer(name).out_shape
        if tensor.shape != declared:
            raise ShapeMismatchError(
                f"layer {name!r} produced {tensor.shape}, spec declares {declared}"
            )
    return ActivationTrace(
        spec=spec,
        input=x.copy(),
        layers=captured,
        logits=logits,
        value=float(value[0]),
        _tape=tape,
        _policy_kernel=weights.kernel("head.policy"),
    )


def _logit_gradient(trace: ActivationTrace, target) -> np.ndarray:
    """d(target)/d(logits) for the three supported target kinds."""
    kind, payload = target
    n = trace.logits.shape[0]
    if kind == "logit":
        k = int(payload)
        if not 0 <= k < n:
            raise TargetRangeError(f"logit index {k} out of [0, {n})")
        g = np.zeros(n, dtype=np.float64)
        g[k] = 1.0
        return g
    p = ops.softmax(trace.logits.astype(np.float64))
    if kind == "prob":
        k = int(payload)
        if not 0 <= k < n:
            raise TargetRangeError(f"probability index {k} out of [0, {n})")
        # dp_k/dz = p_k (e_k - p)
        g = -p[k] * p
        g[k] += p[k]
        return g
    if kind == "prob_group":
        idx = [int(i) for i in payload]
        if not idx or any(not 0 <= i < n for i in idx):
            raise TargetRangeError(f"group indices {idx} out of [0, {n})")
        mask = np.zeros(n, dtype=np.float64)
        mask[idx] = 1.0
        return p * mask - (p @ mask) * p
    raise ParameterError(f"unknown target kind {kind!r}")


def backward_to_input(trace: ActivationTrace, target) -> np.ndarray:
    """Analytic gradient of a scalar policy target w.r.t. the input image.

    ``target`` is ("logit", k), ("prob", k) or ("prob_group", [k, ...]).
    Reverse traversal in float64 off the recorded tape; result cast to
    float32 shaped like the input.
    """
    dlogits = _logit_gradient(trace, target)
    g = trace._policy_kernel.astype(np.float64).T @ dlogits

    skip_grads: list[np.ndarray] = []
    for entry in reversed(trace._tape):
        kind = entry[0]
        if kind == "dense":
            g = entry[1].astype(np.float64).T @ g
        elif kind == "flatten":
            g = g.reshape(entry[1])
        elif kind == "relu":
            g = g * entry[1]
        elif kind == "resadd":
            # gradient reaching the unit output feeds both the residual
            # body (keep flowing) and the skip source (resolved at
            # unit_begin)
            skip_grads.append(g)
        elif kind == "unit_begin":
            g = g + skip_grads.pop()
        elif kind == "conv":
            g = ops.conv2d_input_grad(g, entry[1].astype(np.float64))
        elif kind == "maxpool":
            g = ops.maxpool_input_grad(g, entry[1], entry[2])
        else:  # pragma: no cover
            raise ShapeMismatchError(f"unhandled tape entry {kind!r}")
    if skip_grads:  # pragma: no cover
        raise ShapeMismatchError("unbalanced residual skip gradients")
    if g.shape != trace.spec.input_shape:  # pragma: no cover
        raise ShapeMismatchError(f"backward produced {g.shape}")
    out = g.astype(np.float32)
    if not np.isfinite(out).all():
        raise ArithmeticError("backward produced non-finite values")
    return out
