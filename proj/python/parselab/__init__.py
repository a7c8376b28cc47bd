"""parselab: dependency parsing laboratory (C++ core bindings)."""

from ._core import (
    Corpus,
    cle_decode,
    cli_run,
    decode_relative_pos,
    eisner_decode,
    extract_aux_tags,
    is_projective,
    mad,
    micro_scores,
    nonprojectivity_degree,
    paired_t_test,
    permute_heads,
    projectivize,
    read_conll,
    read_conll_file,
    root_distance,
    validate_tree,
    write_conll,
)

__all__ = [
    "Corpus",
    "cle_decode",
    "cli_run",
    "decode_relative_pos",
    "eisner_decode",
    "extract_aux_tags",
    "is_projective",
    "mad",
    "micro_scores",
    "nonprojectivity_degree",
    "paired_t_test",
    "permute_heads",
    "projectivize",
    "read_conll",
    "read_conll_file",
    "root_distance",
    "validate_tree",
    "write_conll",
]
