from dataclasses import dataclass
from enum import Enum
from typing import Optional

from mamid.evaluation.metrics import ClassificationReport
from mamid.models.flow import Level
from mamid.models.hyperparameters import Hyperparameters


class Status(str, Enum):
    SUCCESS = 'success'
    FAILED = 'failed'


class FailureReason(str, Enum):
    INCOMPATIBLE_CONFIGURATION = 'incompatible-configuration'
    TRAINING_DIVERGED = 'training-diverged'


@dataclass
class ExperimentResult:
    """Outcome of one grid point; the unit of the tuning ledger."""
    index: int
    config: Hyperparameters
    level: Level
    seed: int
    status: Status
    report: Optional[ClassificationReport] = None
    wall_time: Optional[float] = None
    reason: Optional[FailureReason] = None
    detail: Optional[str] = None

    @property
    def succeeded(self):
        return self.status is Status.SUCCESS

    def accuracy(self, metric='accuracy_plain'):
        return self.report.metric(metric) if self.succeeded else None

    def outcome(self):
        """Everything except timing; equal for reruns of the same config and seed."""
        data = self.to_dict()
        data.pop('wall_time')
        return data

    def to_dict(self):
        return {
            'index': self.index,
            'config': self.config.to_dict(),
            'level': self.level.value,
            'seed': self.seed,
            'status': self.status.value,
            'report': self.report.to_dict() if self.report else None,
            'wall_time': self.wall_time,
            'reason': self.reason.value if self.reason else None,
            'detail': self.detail,
        }

    @staticmethod
    def from_dict(result_dict):
        return ExperimentResult(
            index=result_dict['index'],
            config=Hyperparameters.from_dict(result_dict['config']),
            level=Level.parse(result_dict['level']),
            seed=result_dict['seed'],
            status=Status(result_dict['status']),
            report=ClassificationReport.from_dict(result_dict['report']) if result_dict.get('report') else None,
            wall_time=result_dict.get('wall_time'),
            reason=FailureReason(result_dict['reason']) if result_dict.get('reason') else None,
            detail=result_dict.get('detail'),
        )
