"""Python bindings for the adaptive differential denoising core."""

from ._addn import (
    AddnError,
    CheckpointError,
    ContractError,
    DataFormatError,
    DimensionError,
    MissingFileError,
    NumericError,
    ParseError,
    UndefinedMetricError,
    UsageError,
    aff_forward,
    ce_loss,
    checkpoint_tensors,
    compute_metrics,
    config_keys,
    config_text,
    evaluate,
    fft2,
    format_percent,
    gradcheck,
    ifft2,
    mel_spectrogram,
    mhda,
    report,
    smoothed_target,
    soft_shrink,
    synth,
    train,
)

__all__ = [name for name in dir() if not name.startswith("_")]
