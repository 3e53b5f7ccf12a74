from dataclasses import dataclass


@dataclass(frozen=True)
class AdapterConfig:
    """Which model to wrap and how to run it."""

    model_id: str = "openai/whisper-small"
    device: str = "cpu"
    batch_size: int = 8

    def __post_init__(self):
        if not self.model_id:
            raise ValueError("model_id must be non-empty")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
