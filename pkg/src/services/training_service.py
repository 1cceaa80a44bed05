"""
Training Service
Weighted cross-entropy trainer and the class-dependent-reward (CDR) trainer
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence, Union

import numpy as np

from src.engine import backward, make_optimizer, optimizer_step, ops
from src.engine.tensor import Tensor
from src.models.dataset import ARRecord, CVSplit
from src.models.training import (
    CDRConfig,
    Checkpoint,
    ClassWeights,
    DLTrainConfig,
    FoldOutcome,
    Rewards,
    TrainLog,
    TrainLogRow,
    TrainResult,
)
from src.networks.base import Classifier
from src.networks.checkpoint import NetworkConfig, apply_checkpoint, build_model, capture
from src.services.replay import ReplayMemory
from src.tools.metrics import evaluate
from src.tools.standardize import SplitData, prepare_split
from src.utils.errors import ConfigError, ContractError, DataError, TrainingError

logger = logging.getLogger(__name__)


def fold_seed(seed: int, fold: int) -> int:
    """Seed of one fold (or sweep cell), independent of execution order."""
    return int(np.random.SeedSequence([seed, fold]).generate_state(1)[0])


# Losses and reward rules ---------------------------------------------------


def compute_class_weights(counts: Sequence[int], n_classes: Optional[int] = None) -> ClassWeights:
    """ω_k = N_total / (K · N_k)."""
    counts = [int(c) for c in counts]
    k = n_classes or len(counts)
    if len(counts) != k:
        raise ContractError(f"expected {k} class counts, got {len(counts)}")
    if any(c <= 0 for c in counts):
        raise DataError(f"every class needs at least one training example, got counts {counts}")
    total = sum(counts)
    return ClassWeights(weights=[total / (k * c) for c in counts], counts=counts)


def weighted_ce_loss(probs: Tensor, labels: np.ndarray, weights: Sequence[float]) -> Tensor:
    """−Σ_n ω_{y_n} ln ŷ_{n, y_n}, with ŷ clamped at 1e-12."""
    labels = np.asarray(labels, dtype=np.int64)
    per_sample = np.asarray(weights, dtype=np.float64)[labels]
    log_p = ops.log(ops.pick(probs, labels))
    return ops.scale(ops.sum_all(ops.mul(Tensor(per_sample), log_p)), -1.0)


def assign_reward(action: int, label: int, rewards: Rewards) -> float:
    if action == 1:
        return rewards.TP if label == 1 else rewards.FP
    return rewards.TN if label == 0 else rewards.FN


def select_action(p: float, epsilon: float, rng: np.random.Generator) -> int:
    """ε-greedy: explore uniformly with probability ε, else act on p ≥ 0.5."""
    if not 0.0 <= epsilon <= 1.0:
        raise ContractError(f"epsilon must lie in [0, 1], got {epsilon}")
    if rng.random() < epsilon:
        return int(rng.integers(2))
    return int(p >= 0.5)


def decay_epsilon(epsilon: float, decay: float, floor: float) -> float:
    return max(epsilon * decay, floor)


def cdr_loss(q: Tensor, rewards: np.ndarray) -> Tensor:
    """Negated reward-weighted log-likelihood −Σ R_n ln Q(S_n, A_n)."""
    rewards = np.asarray(rewards, dtype=np.float64)
    if rewards.shape != q.shape:
        raise ContractError(f"{rewards.size} rewards for {q.size} action probabilities")
    return ops.scale(ops.sum_all(ops.mul(Tensor(rewards), ops.log(q))), -1.0)


# Trainers ------------------------------------------------------------------


def _check_loss(loss: Tensor, where: str) -> None:
    if not math.isfinite(loss.item()):
        logger.error("Non-finite loss at %s", where)
        raise TrainingError(f"loss became non-finite at {where}")


def _batches(order: np.ndarray, batch_size: int):
    """Consecutive batches; a trailing single example joins the previous batch."""
    starts = list(range(0, len(order), batch_size))
    if len(starts) > 1 and len(order) - starts[-1] == 1:
        starts.pop()
    for i, start in enumerate(starts):
        end = starts[i + 1] if i + 1 < len(starts) else len(order)
        yield order[start:end]


def _check_batch_size(model: Classifier, batch_size: int) -> None:
    """Batch-norm statistics need at least two rows per training batch."""
    if batch_size < 2 and any(True for _ in model.named_bn_states()):
        raise ConfigError(f"batch size {batch_size} is too small for a batch-norm network")


def validation_score(model: Classifier, data: SplitData, monitor: str) -> tuple:
    """(monitored score, TSS, BSS) on the validation set."""
    report = evaluate(model.predict_proba_batch(data.x_val), data.y_val)
    score = report.tss if monitor == "TSS" else report.bss
    return score, report.tss, report.bss


class TrainingService:
    """Service running both trainers over a classifier and one split"""

    def train_dl(self, model: Classifier, data: SplitData, config: DLTrainConfig) -> TrainResult:
        """
        Minibatch training on weighted cross-entropy; the parameters with the
        best validation score are checkpointed and restored at the end.

        Raises:
            ConfigError: batch size 1 on a network with batch-norm.
            TrainingError: the loss becomes non-finite (names the epoch).
        """
        _check_batch_size(model, config.batch_size)
        params = model.parameters()
        optimizer = make_optimizer(config.optimizer, config.learning_rate)
        weights = compute_class_weights(np.bincount(data.y_train, minlength=2)).weights
        rng = np.random.default_rng(config.seed)

        log = TrainLog(trainer="dl")
        best: Optional[Checkpoint] = None
        for epoch in range(1, config.epochs + 1):
            losses = []
            for batch in _batches(rng.permutation(len(data.y_train)), config.batch_size):
                probs = model.forward(data.x_train[batch], mode="train")
                loss = weighted_ce_loss(probs, data.y_train[batch], weights)
                _check_loss(loss, f"epoch {epoch}")
                optimizer_step(optimizer, params, backward(loss))
                losses.append(loss.item())

            score, val_tss, val_bss = validation_score(model, data, config.monitor)
            log.rows.append(
                TrainLogRow(
                    step=epoch,
                    train_loss=float(np.mean(losses)),
                    val_tss=val_tss,
                    val_bss=val_bss,
                    optimizer_steps=optimizer.step,
                )
            )
            logger.info(
                "Epoch %d/%d loss %.4f val TSS %.3f BSS %.3f",
                epoch,
                config.epochs,
                log.rows[-1].train_loss,
                val_tss,
                val_bss,
            )
            if best is None or score > best.score:
                best = capture(model, monitor=config.monitor, score=score, step=epoch)
                logger.info("New best %s %.4f at epoch %d", config.monitor, score, epoch)

        apply_checkpoint(model, best)
        return TrainResult(checkpoint=best, log=log)

    def train_cdr(self, model: Classifier, data: SplitData, config: CDRConfig) -> TrainResult:
        """
        Class-dependent-reward loop: per training AR act ε-greedily, store
        (state, action, reward) in replay, and once the memory holds more than
        B entries take one optimizer step on a sampled batch. ε decays and the
        validation score is checked after every episode.
        """
        # updates start once the memory holds more than B entries
        if config.replay_capacity <= config.batch_size:
            raise ConfigError(
                f"replay capacity {config.replay_capacity} must exceed "
                f"batch size {config.batch_size}"
            )
        _check_batch_size(model, config.batch_size)
        params = model.parameters()
        optimizer = make_optimizer("adam", config.learning_rate)
        memory = ReplayMemory(config.replay_capacity)
        rng = np.random.default_rng(config.seed)
        epsilon = config.epsilon_start

        log = TrainLog(trainer="cdr")
        best: Optional[Checkpoint] = None
        for episode in range(1, config.episodes + 1):
            losses = []
            for state in rng.permutation(len(data.y_train)):
                p = model.predict_proba(data.x_train[state])
                action = select_action(p, epsilon, rng)
                reward = assign_reward(action, int(data.y_train[state]), config.rewards)
                memory.push(int(state), action, reward)
                if len(memory) <= config.batch_size:
                    continue

                sample = memory.sample(config.batch_size, rng)
                states = np.array([e.state for e in sample])
                probs = model.forward(data.x_train[states], mode="train")
                q = ops.pick(probs, np.array([e.action for e in sample]))
                loss = cdr_loss(q, np.array([e.reward for e in sample]))
                _check_loss(loss, f"episode {episode}")
                optimizer_step(optimizer, params, backward(loss))
                losses.append(loss.item())
                logger.debug("Step %d loss %.4f", optimizer.step, losses[-1])

            epsilon = decay_epsilon(epsilon, config.epsilon_decay, config.epsilon_floor)
            score, val_tss, val_bss = validation_score(model, data, config.monitor)
            log.rows.append(
                TrainLogRow(
                    step=episode,
                    train_loss=float(np.mean(losses)) if losses else float("nan"),
                    val_tss=val_tss,
                    val_bss=val_bss,
                    epsilon=epsilon,
                    optimizer_steps=optimizer.step,
                )
            )
            logger.info(
                "Episode %d/%d steps %d val TSS %.3f BSS %.3f eps %.4f",
                episode,
                config.episodes,
                optimizer.step,
                val_tss,
                val_bss,
                epsilon,
            )
            if best is None or score > best.score:
                best = capture(model, monitor=config.monitor, score=score, step=episode)
                logger.info("New best %s %.4f at episode %d", config.monitor, score, episode)

        apply_checkpoint(model, best)
        return TrainResult(checkpoint=best, log=log)


# Global service instance
_training_service = None


def get_training_service() -> TrainingService:
    """Get or create training service instance"""
    global _training_service
    if _training_service is None:
        _training_service = TrainingService()
    return _training_service


def train_fold(
    records: Sequence[ARRecord],
    split: CVSplit,
    network: NetworkConfig,
    trainer: str,
    config: Union[DLTrainConfig, CDRConfig],
    seed: int,
    threshold: float = 0.5,
) -> FoldOutcome:
    """
    Standardize one split, build a model from the fold seed, train it and
    score the test set. Module-level so sweep workers can pickle it.
    """
    data = prepare_split(records, split)
    cell_seed = fold_seed(seed, split.index)
    network = network.model_copy(update={"F": len(data.feature_names)})
    model = build_model(network, cell_seed)
    config = config.model_copy(update={"seed": cell_seed})

    service = get_training_service()
    if trainer == "dl":
        result = service.train_dl(model, data, config)
    elif trainer == "cdr":
        result = service.train_cdr(model, data, config)
    else:
        raise ConfigError(f"unknown trainer '{trainer}' (expected dl or cdr)")

    report = evaluate(model.predict_proba_batch(data.x_test), data.y_test, threshold)
    logger.info("Fold %d test TSS %.3f BSS %.3f", split.index, report.tss, report.bss)
    return FoldOutcome(
        fold=split.index, seed=cell_seed, result=result, test_report=report, stats=data.stats
    )


def _train_fold_task(args: tuple) -> FoldOutcome:
    return train_fold(*args)


def train_folds(
    records: Sequence[ARRecord],
    splits: Sequence[CVSplit],
    network: NetworkConfig,
    trainer: str,
    config: Union[DLTrainConfig, CDRConfig],
    seed: int,
    jobs: int = 1,
    threshold: float = 0.5,
) -> List[FoldOutcome]:
    """Train every split; results keep split order whatever ``jobs`` is."""
    tasks = [(records, split, network, trainer, config, seed, threshold) for split in splits]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_train_fold_task, tasks))
    return [_train_fold_task(task) for task in tasks]
