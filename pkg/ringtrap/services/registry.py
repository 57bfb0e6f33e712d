"""Registers names for command workflows.
"""

from ringtrap.constants import (
    LOSS_COMMAND,
    MODES_COMMAND,
    REPORT_COMMAND,
    SPECTRUM_FIT_COMMAND,
    SWEEP_COMMAND,
    TRANSPORT_COMMAND,
    TRAP_COMMAND,
    TRAP_SCAN_COMMAND
)
from ringtrap.workflows.loss import LossWorkflow
from ringtrap.workflows.modes import ModesWorkflow
from ringtrap.workflows.report import ReportWorkflow
from ringtrap.workflows.spectrum_fit import SpectrumFitWorkflow
from ringtrap.workflows.sweep import SweepWorkflow
from ringtrap.workflows.transport import TransportWorkflow
from ringtrap.workflows.trap import TrapWorkflow
from ringtrap.workflows.trap_scan import TrapScanWorkflow

workflow_registry = {
    MODES_COMMAND: ModesWorkflow,
    SPECTRUM_FIT_COMMAND: SpectrumFitWorkflow,
    TRAP_COMMAND: TrapWorkflow,
    TRAP_SCAN_COMMAND: TrapScanWorkflow,
    TRANSPORT_COMMAND: TransportWorkflow,
    LOSS_COMMAND: LossWorkflow,
    SWEEP_COMMAND: SweepWorkflow,
    REPORT_COMMAND: ReportWorkflow
}
