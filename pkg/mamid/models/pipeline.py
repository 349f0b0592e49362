from dataclasses import dataclass, field
from typing import List, Optional

from mamid.models.flow import Level
from mamid.models.hyperparameters import GridSpace
from mamid.utils.error_handler import UsageError


def parse_levels(value):
    """'all' or one level name -> ordered list of Level."""
    if value is None or value == 'all':
        return list(Level)
    return [Level.parse(value)]


@dataclass
class PipelineConfig:
    """Resolved settings of one command invocation."""
    output_dir: str
    data_path: Optional[str] = None
    levels: List[Level] = field(default_factory=lambda: list(Level))
    subset_size: int = 10000
    test_fraction: float = 0.25
    grid: GridSpace = field(default_factory=GridSpace)
    seed: int = 0
    parallelism: int = 1

    def __post_init__(self):
        self.levels = [Level.parse(level) for level in self.levels]
        if self.parallelism is None or self.parallelism < 1:
            raise UsageError(f'parallelism must be >= 1, got {self.parallelism}')
        if self.subset_size is None or self.subset_size < 1:
            raise UsageError(f'subset size must be >= 1, got {self.subset_size}')
        if not 0 < self.test_fraction < 1:
            raise UsageError(f'test fraction must lie in (0, 1), got {self.test_fraction}')

    def to_dict(self):
        return {
            'output_dir': self.output_dir,
            'data_path': self.data_path,
            'levels': [level.value for level in self.levels],
            'subset_size': self.subset_size,
            'test_fraction': self.test_fraction,
            'grid': self.grid.to_dict(),
            'seed': self.seed,
            'parallelism': self.parallelism,
        }

    @staticmethod
    def from_dict(config_dict):
        return PipelineConfig(
            output_dir=config_dict['output_dir'],
            data_path=config_dict.get('data_path'),
            levels=config_dict.get('levels', [level.value for level in Level]),
            subset_size=config_dict.get('subset_size', 10000),
            test_fraction=config_dict.get('test_fraction', 0.25),
            grid=GridSpace.from_dict(config_dict.get('grid', {})),
            seed=config_dict.get('seed', 0),
            parallelism=config_dict.get('parallelism', 1),
        )
