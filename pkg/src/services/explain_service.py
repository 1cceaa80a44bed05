"""
Explain Service
Exact Shapley attributions of a trained model over a set of ARs, plus the
global-importance, waterfall and beeswarm tables
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.models.attribution import Attribution, GlobalImportance, ShapConfig, WaterfallStep
from src.models.dataset import ARRecord, StandardizationStats
from src.networks.base import Classifier
from src.tools import shapley
from src.tools.standardize import apply_standardizer, to_arrays
from src.utils.errors import ContractError

logger = logging.getLogger(__name__)


@dataclass
class Explanation:
    attributions: List[Attribution]
    global_importance: GlobalImportance
    waterfalls: Dict[int, List[WaterfallStep]]
    beeswarm: pd.DataFrame
    expected_value: float = field(default=float("nan"))


class ExplainService:
    """Service for Shapley explanations of trained classifiers"""

    def background(
        self,
        config: ShapConfig,
        stats: StandardizationStats,
        train_records: Sequence[ARRecord],
        instance: Optional[ARRecord] = None,
    ) -> np.ndarray:
        """Training-set channel means (standardized), or one explicit AR."""
        if config.background == "instance":
            if instance is None:
                raise ContractError("background 'instance' needs a background AR")
            return apply_standardizer(stats, instance).x
        x_train, _, _ = to_arrays(stats, train_records)
        return x_train.mean(axis=(0, 1))

    def explain(
        self,
        model: Classifier,
        stats: StandardizationStats,
        records: Sequence[ARRecord],
        train_records: Sequence[ARRecord],
        config: Optional[ShapConfig] = None,
        background_record: Optional[ARRecord] = None,
    ) -> Explanation:
        config = config or ShapConfig()
        if not records:
            raise ContractError("no ARs to explain")
        bg = self.background(config, stats, train_records, background_record)
        names = list(stats.feature_names)
        players = config.players if config.players is not None else list(range(len(names)))

        attributions = []
        series = {}
        for record in records:
            x = apply_standardizer(stats, record).x
            attributions.append(
                shapley.exact_shapley(
                    model.predict_proba_batch, x, bg, names, ar_id=record.ar_id, players=players
                )
            )
            series[record.ar_id] = record.series[:, players]
        logger.info(
            "Explained %d ARs with %d players (%d coalitions each)",
            len(attributions),
            len(players),
            attributions[0].evaluations,
        )

        x_train, _, _ = to_arrays(stats, train_records)
        rows = shapley.beeswarm_data(attributions, series)
        return Explanation(
            attributions=attributions,
            global_importance=shapley.global_importance(attributions),
            waterfalls={a.ar_id: shapley.waterfall_data(a) for a in attributions},
            beeswarm=pd.DataFrame([r.model_dump() for r in rows]),
            expected_value=float(model.predict_proba_batch(x_train).mean()),
        )

    def attribution_frame(self, attributions: Sequence[Attribution]) -> pd.DataFrame:
        """``ar_id,feature,phi`` rows."""
        return pd.DataFrame(
            [
                {"ar_id": a.ar_id, "feature": name, "phi": phi}
                for a in attributions
                for name, phi in zip(a.feature_names, a.phi)
            ]
        )

    def summary_frame(self, attributions: Sequence[Attribution]) -> pd.DataFrame:
        """``ar_id,phi0,sum_phi,f_x`` rows (efficiency check per AR)."""
        return pd.DataFrame(
            [
                {"ar_id": a.ar_id, "phi0": a.phi0, "sum_phi": float(np.sum(a.phi)), "f_x": a.f_x}
                for a in attributions
            ]
        )

    def global_frame(self, importance: GlobalImportance) -> pd.DataFrame:
        """``feature,phi_global`` rows, most important first."""
        frame = pd.DataFrame(
            {"feature": importance.feature_names, "phi_global": importance.phi_global}
        )
        return frame.sort_values("phi_global", ascending=False, kind="stable").reset_index(
            drop=True
        )

    def waterfall_frame(self, waterfalls: Dict[int, List[WaterfallStep]]) -> pd.DataFrame:
        """``ar_id,feature,phi,running_total`` rows."""
        return pd.DataFrame(
            [
                {"ar_id": ar_id, **step.model_dump()}
                for ar_id, steps in waterfalls.items()
                for step in steps
            ]
        )


# Global service instance
_explain_service = None


def get_explain_service() -> ExplainService:
    """Get or create explain service instance"""
    global _explain_service
    if _explain_service is None:
        _explain_service = ExplainService()
    return _explain_service
