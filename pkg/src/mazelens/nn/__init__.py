from .ops import (
    conv2d_forward,
    conv2d_input_grad,
    dense_forward,
    flatten_forward,
    maxpool_forward,
    maxpool_input_grad,
    relu_forward,
    resadd_forward,
    softmax,
    to_chw,
)
from .network import (
    ActivationTrace,
    LayerSpec,
    NetworkSpec,
    backward_to_input,
    evaluate_logits,
    forward_with_capture,
)
from .weights import (
    WeightStore,
    init_random_weights,
    load_weights,
    save_weights,
)

__all__ = [
    "ActivationTrace",
    "LayerSpec",
    "NetworkSpec",
    "WeightStore",
    "backward_to_input",
    "conv2d_forward",
    "conv2d_input_grad",
    "dense_forward",
    "evaluate_logits",
    "flatten_forward",
    "forward_with_capture",
    "init_random_weights",
    "load_weights",
    "maxpool_forward",
    "maxpool_input_grad",
    "relu_forward",
    "resadd_forward",
    "save_weights",
    "softmax",
    "to_chw",
]
