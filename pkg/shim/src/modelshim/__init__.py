"""Serving shim for the claim-editing wire protocol.

Implements the five JSON endpoints (/generate, /generate_fused, /score,
/nli, /search) either with small open models or with a deterministic
fixture mode that reproduces the pipeline's offline mocks byte for byte,
and exports training JSONL into the fused segment layout.
"""

__version__ = "0.1.0"
