"""
Feature Grid Models

2-D field grids and the set of co-registered maps the SHARP summation
keywords are computed from.
"""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

GRADIENT_COLUMNS = [
    "GRAD_MEAN",
    "GRAD_STD",
    "GRAD_MEDIAN",
    "GRAD_MIN",
    "GRAD_MAX",
    "GRAD_SKEW",
    "GRAD_KURT",
]
WAVELET_COLUMNS = [f"HAAR_E{level}" for level in range(1, 6)]
FLUX_COLUMNS = ["FLUX_UNSIGNED", "FLUX_SIGNED", "FLUX_NEGATIVE", "FLUX_POSITIVE"]


class FieldGrid(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    values: np.ndarray = Field(..., description="H×W field values")
    pixel_area: float = Field(1.0, gt=0, description="dA")

    @field_validator("values", mode="before")
    @classmethod
    def _as_matrix(cls, value):
        return np.array(value, dtype=np.float64)

    @model_validator(mode="after")
    def _check(self):
        if self.values.ndim != 2 or min(self.values.shape) < 1:
            raise ValueError(f"grid must be a non-empty 2-D array, got shape {self.values.shape}")
        if not np.isfinite(self.values).all():
            raise ValueError("grid contains non-finite values")
        return self

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


class VectorFieldMaps(BaseModel):
    """B_z, J_z, shear angle (degrees), observed and potential field strength."""

    bz: FieldGrid
    jz: FieldGrid
    shear_deg: FieldGrid
    b_obs: FieldGrid
    b_pot: FieldGrid
