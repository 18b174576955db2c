"""Block-scaled FP4 quantization toolkit."""

from .formats import (
    BUILTIN_FORMATS,
    E2M1,
    E2M1_MAGNITUDES,
    E2M1_MAX,
    E4M3,
    E8M0,
    UE5M3,
    CodeValue,
    FormatSpec,
    encode_element_fp4,
    enumerate_values,
    round_to_format,
)
from .quantizer import (
    Block,
    ErrorReport,
    QuantizedBlock,
    dequantize_block,
    error_report,
    quantize_block,
    quantize_tensor,
)
from .scaling import (
    ScaleResult,
    ScaleStrategy,
    hierarchical_wrap,
    scale_abs_max,
    scale_brute_force,
    scale_four_over_six,
    scale_mx_pow2,
    scale_prevent_zero,
)
from .study import StudyConfig, region_exemplars, run_histograms, run_sweep
from .tensorio import MaskSpec, TensorFile, load_tensor, mask_range, report_tensor_error, save_tensor

__all__ = [
    "BUILTIN_FORMATS", "E2M1", "E2M1_MAGNITUDES", "E2M1_MAX", "E4M3", "E8M0", "UE5M3",
    "CodeValue", "FormatSpec", "encode_element_fp4", "enumerate_values", "round_to_format",
    "Block", "ErrorReport", "QuantizedBlock", "dequantize_block", "error_report",
    "quantize_block", "quantize_tensor",
    "ScaleResult", "ScaleStrategy", "hierarchical_wrap", "scale_abs_max",
    "scale_brute_force", "scale_four_over_six", "scale_mx_pow2", "scale_prevent_zero",
    "StudyConfig", "region_exemplars", "run_histograms", "run_sweep",
    "MaskSpec", "TensorFile", "load_tensor", "mask_range", "report_tensor_error",
    "save_tensor",
]
