"""
Attribution Models

Exact Shapley attributions where each feature channel (all 40 time steps) is
one player.
"""

from typing import List, Literal, Optional

from pydantic import BaseModel, Field, model_validator

MAX_PLAYERS = 16


class ShapConfig(BaseModel):
    background: Literal["mean", "instance"] = Field(
        "mean", description="Training-mean vector (zeros once standardized) or an explicit instance"
    )
    players: Optional[List[int]] = Field(None, description="Feature indices; default all")

    @model_validator(mode="after")
    def _cap(self):
        if self.players is not None and len(self.players) > MAX_PLAYERS:
            raise ValueError(f"at most {MAX_PLAYERS} players are supported")
        return self


class Attribution(BaseModel):
    ar_id: int
    feature_names: List[str]
    phi0: float = Field(..., description="Model output on the empty coalition v(∅)")
    phi: List[float]
    f_x: float = Field(..., description="Model output on the full coalition")
    evaluations: int = Field(..., description="Distinct coalition values computed")


class GlobalImportance(BaseModel):
    feature_names: List[str]
    phi_global: List[float]


class WaterfallStep(BaseModel):
    feature: str
    phi: float
    running_total: float


class BeeswarmRow(BaseModel):
    feature: str
    ar_id: int
    phi: float
    magnitude: float = Field(..., ge=0, le=1)
