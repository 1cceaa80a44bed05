"""
Network Configuration Models

Hyperparameters of the time-series Transformer and the MLP baseline. Width, heads,
dropout and head layers are engineering defaults.
"""

from typing import List, Literal

from pydantic import BaseModel, Field, model_validator


class TransformerConfig(BaseModel):
    kind: Literal["transformer"] = "transformer"
    T: int = Field(40, ge=1, description="Sequence length")
    F: int = Field(10, ge=1, description="Features per time step")
    d_model: int = Field(16, ge=1)
    heads: int = Field(4, ge=1)
    encoder_blocks: int = Field(4, ge=0, description="0 keeps only projection + head")
    mlp_hidden: int = Field(32, ge=1)
    dropout_rate: float = Field(0.1, ge=0, lt=1)
    head_hidden: List[int] = Field(default_factory=lambda: [64, 16])
    n_classes: Literal[2] = 2

    @model_validator(mode="after")
    def _divisible(self):
        if self.d_model % self.heads != 0:
            raise ValueError(f"d_model {self.d_model} is not divisible by heads {self.heads}")
        return self


class MLPConfig(BaseModel):
    kind: Literal["mlp"] = "mlp"
    T: int = Field(40, ge=1)
    F: int = Field(10, ge=1)
    hidden: List[int] = Field(default_factory=lambda: [32])
    dropout_rate: float = Field(0.0, ge=0, lt=1)
    n_classes: Literal[2] = 2
