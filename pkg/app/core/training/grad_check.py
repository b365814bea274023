"""
Gradientenprüfung für AUREXA-SE
-------------------------------
Vergleicht analytische Gradienten (Autograd) mit zentralen finiten Differenzen
in 64-Bit-Arithmetik auf einer kleinen Konfiguration.

Relativer Fehler: |a - n| / max(|a|, |n|, 1e-5)
"""

import logging
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import torch
import torch.nn as nn

from app.core.metrics.evaluation import mse_loss
from app.core.model.aurexa import MODULE_NAMES, build_model
from app.models.schemas import GradCheckReport, ModelConfig, model_preset

# Logger konfigurieren
logger = logging.getLogger("aurexa.training.gradcheck")

RELATIVE_FLOOR = 1e-5

# (Bezeichnung, Parameter, Index im abgeflachten Parameter)
ParamEntry = Tuple[str, nn.Parameter, int]

def relative_error(analytic: float, numeric: float, floor: float = RELATIVE_FLOOR) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)

def finite_difference_check(loss_fn: Callable[[], torch.Tensor], entries: Sequence[ParamEntry],
                            step: float = 1e-4, tolerance: float = 1e-3) -> List[Dict]:
    """
    Prüft die Gradienten einzelner Parametereinträge.

    Args:
        loss_fn: Liefert den skalaren Verlust für den aktuellen Parameterzustand
        entries: Zu prüfende Einträge
        step: Schrittweite der zentralen Differenz
        tolerance: Grenze für den relativen Fehler

    Returns:
        Ein Ergebnis je Eintrag mit analytic, numeric, rel_error und passed
    """
    params = {id(param): param for _, param, _ in entries}
    for param in params.values():
        param.grad = None
    loss_fn().backward()
    analytic = [float(param.grad.reshape(-1)[index]) if param.grad is not None else 0.0
                for _, param, index in entries]

    results = []
    with torch.no_grad():
        for (label, param, index), grad in zip(entries, analytic):
            flat = param.view(-1)
            original = flat[index].item()
            flat[index] = original + step
            loss_plus = float(loss_fn())
            flat[index] = original - step
            loss_minus = float(loss_fn())
            flat[index] = original
            numeric = (loss_plus - loss_minus) / (2.0 * step)
            error = relative_error(grad, numeric)
            results.append({
                "param": label,
                "index": index,
                "analytic": grad,
                "numeric": numeric,
                "rel_error": error,
                "passed": error < tolerance,
            })
    return results

def sample_entries(module: nn.Module, prefix: str, count: int, rng: np.random.Generator) -> List[ParamEntry]:
    """Zieht count Einträge gleichverteilt über alle Parameterwerte eines Moduls."""
    named = [(f"{prefix}.{name}", param) for name, param in module.named_parameters() if param.requires_grad]
    sizes = np.array([param.numel() for _, param in named])
    if sizes.sum() == 0 or count <= 0:
        return []
    positions = rng.choice(int(sizes.sum()), size=min(count, int(sizes.sum())), replace=False)
    bounds = np.cumsum(sizes)
    entries = []
    for position in np.sort(positions):
        which = int(np.searchsorted(bounds, position, side="right"))
        start = bounds[which - 1] if which > 0 else 0
        label, param = named[which]
        entries.append((label, param, int(position - start)))
    return entries

def grad_check(cfg: Optional[ModelConfig] = None, tolerance: float = 1e-3, num_params: int = 200,
               step: float = 1e-4, seed: int = 0, zero_loss: bool = False,
               num_samples: int = 64, num_frames: int = 4, batch_size: int = 2) -> GradCheckReport:
    """
    Gradientenprüfung des Gesamtmodells.

    Die Einträge werden gleichmäßig auf Audio-Encoder, Video-Encoder, Fusion,
    zeitliche Modellierung und Decoder verteilt.

    Args:
        cfg: Modellkonfiguration (Standard: Preset 'tiny')
        tolerance: Grenze für den relativen Fehler
        num_params: Anzahl geprüfter Parametereinträge
        step: Schrittweite der zentralen Differenz
        seed: Seed für Initialisierung, Eingaben und Stichprobe
        zero_loss: Ziel = Modellausgabe, d.h. Verlust und Gradienten verschwinden
        num_samples: Audiolänge T
        num_frames: Anzahl Video-Frames

    Returns:
        GradCheckReport
    """
    cfg = (cfg or model_preset("tiny")).model_copy(update={"seed": seed})
    model = build_model(cfg).double().train()

    generator = torch.Generator().manual_seed(seed)
    size = cfg.video.image_size
    mixture = (torch.rand(batch_size, num_samples, generator=generator, dtype=torch.float64) * 2 - 1) * 0.5
    video = torch.rand(batch_size, num_frames, size, size, 3, generator=generator, dtype=torch.float64)
    if zero_loss:
        with torch.no_grad():
            target = model(mixture, video).detach().clone()
    else:
        target = (torch.rand(batch_size, num_samples, generator=generator, dtype=torch.float64) * 2 - 1) * 0.5

    def loss_fn() -> torch.Tensor:
        return mse_loss(model(mixture, video), target)

    rng = np.random.default_rng(seed)
    per_module_count = [num_params // len(MODULE_NAMES)] * len(MODULE_NAMES)
    for i in range(num_params % len(MODULE_NAMES)):
        per_module_count[i] += 1

    entries = []
    for name, count in zip(MODULE_NAMES, per_module_count):
        entries.extend(sample_entries(getattr(model, name), name, count, rng))

    results = finite_difference_check(loss_fn, entries, step, tolerance)

    report = GradCheckReport(tolerance=tolerance)
    for result in results:
        module = result["param"].split(".", 1)[0]
        stats = report.per_module.setdefault(module, {"checked": 0, "passed": 0})
        stats["checked"] += 1
        report.checked += 1
        if result["passed"]:
            stats["passed"] += 1
            report.passed_count += 1
        else:
            report.failures.append(result)

    model.zero_grad()
    loss_fn().backward()
    report.max_output_grad = max(float(p.grad.abs().max()) for p in model.decoder.output.parameters())

    logger.info(
        f"Gradientenprüfung: {report.passed_count}/{report.checked} Einträge mit relativem Fehler < {tolerance} "
        f"({report.pass_fraction:.1%}, {'bestanden' if report.passed else 'nicht bestanden'})"
    )
    return report
