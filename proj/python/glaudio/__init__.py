"""Graph wave encoder, spectral oracle and sequence decoders."""

from ._core import (
    GlaudioError,
    Graph,
    GraphBundle,
    LaplacianOperator,
    OperatorVariant,
    SpectralDecomposition,
    build_operator,
    compare_encodings,
    convergence_study,
    default_config,
    dirichlet_energy,
    eigendecompose,
    energy_drift,
    exact_signal,
    load_bundle,
    load_content_cites,
    oversmoothing_metric,
    propagate,
    receptive_field,
    save_bundle,
    split_provenance,
    synth_distance_task,
    synth_sbm,
    synthesize_audio,
    train,
    with_seeded_splits,
    write_wav,
)

__all__ = [name for name in dir() if not name.startswith("_")]
