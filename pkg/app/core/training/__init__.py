"""
Trainings-Paket für AUREXA-SE
-----------------------------
Checkpoints, Gradientenprüfung und Export des Trainingsverlaufs.
"""

from app.core.training.checkpoint import CheckpointState, save_checkpoint, load_checkpoint, config_digest
from app.core.training.grad_check import grad_check, finite_difference_check, relative_error, sample_entries
from app.core.training.history import (
    write_history_csv, read_history_csv, plot_history, export_history, HISTORY_COLUMNS
)

__all__ = [
    'CheckpointState',
    'save_checkpoint',
    'load_checkpoint',
    'config_digest',
    'grad_check',
    'finite_difference_check',
    'relative_error',
    'sample_entries',
    'write_history_csv',
    'read_history_csv',
    'plot_history',
    'export_history',
    'HISTORY_COLUMNS'
]
