"""
AUREXA-SE Kommandozeile
-----------------------
Einstiegspunkt für den gesamten Ablauf: Szenen erzeugen, trainieren, verbessern,
auswerten, Gradienten prüfen und Trainingsverläufe zeichnen.

Exit-Codes: 0 Erfolg, 1 Fehler bei der Ausführung, 2 Aufruffehler.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

# Importe aus app-Modulen
from app.config import (
    APP_DESCRIPTION, APP_NAME, CLIP_FRAMES, CLIP_SAMPLES, DATA_DIR, LOG_FORMAT, LOG_LEVEL, MIXTURE_PATTERN, RUNS_DIR,
    TARGET_PATTERN
)
from app.api.PesqToolClient import PesqToolClient
from app.core.data.dataset import load_manifest, load_scene, write_manifest, write_scene
from app.core.data.synthesizer import synth_scene
from app.core.media.audio_io import save_wav
from app.core.training.checkpoint import load_checkpoint
from app.core.training.grad_check import grad_check
from app.core.training.history import plot_history, read_history_csv
from app.models.schemas import FilePatterns, load_run_config, synth_preset
from app.services.evaluation_service import EvaluationService
from app.services.training_service import TrainingService
from app.utils.error_handling import AurexaError, ConfigurationError, format_exception, handle_exception
from app.utils.format_utils import format_optional
from app.utils.random_utils import derive_seed

# Logger konfigurieren
logger = logging.getLogger("aurexa.cli")

PATTERN_NAMES = ("mixture", "target", "interferer", "frames_dir", "frames_tensor", "meta")

#
# Dateinamensmuster
#

def pattern_overrides(values: Optional[List[str]]) -> dict:
    """
    Wandelt wiederholte --pattern NAME=MUSTER-Angaben in Werte für den patterns-Abschnitt um.

    Raises:
        ConfigurationError: Unbekannter Name oder fehlendes '='
    """
    overrides = {}
    for item in values or []:
        name, separator, pattern = item.partition("=")
        if not separator or name not in PATTERN_NAMES:
            raise ConfigurationError(
                f"Ungültiges --pattern '{item}', erwartet NAME=MUSTER mit NAME aus {', '.join(PATTERN_NAMES)}"
            )
        overrides[f"{name}_pattern"] = pattern
    return overrides

def resolve_patterns(args: argparse.Namespace) -> FilePatterns:
    """Dateinamensmuster aus --config (Abschnitt patterns) und --pattern-Flags."""
    overrides = pattern_overrides(args.pattern)
    return load_run_config(args.config, {"patterns": overrides} if overrides else None).patterns

#
# Unterbefehle
#

def cmd_synth_data(args: argparse.Namespace) -> int:
    """Erzeugt count synthetische Szenen samt Manifest; die letzten Szenen bilden den dev-Split."""
    cfg = synth_preset(args.preset)
    patterns = resolve_patterns(args)
    num_dev = int(round(args.count * args.dev_fraction))
    entries = []
    for index in range(args.count):
        scene_id = f"scene_{index:05d}"
        scene = synth_scene(derive_seed(args.seed, "scene", index), cfg, scene_id=scene_id)
        write_scene(scene, args.out, frames_format=args.frames_format, patterns=patterns)
        entries.append((scene_id, "dev" if index >= args.count - num_dev else "train"))
    write_manifest(args.out, entries)
    print(f"{args.count} Szenen nach {args.out} geschrieben ({args.count - num_dev} train, {num_dev} dev)")
    return 0

def cmd_train(args: argparse.Namespace) -> int:
    """Trainiert ein Modell aus Konfigurationsdatei und Flags."""
    overrides: dict = {}
    train_overrides = {
        "epochs": args.epochs,
        "batch_size": args.batch_size,
        "learning_rate": args.lr,
        "optimizer": args.optimizer,
        "max_steps": args.max_steps,
        "validate_every": args.validate_every,
    }
    train_overrides = {key: value for key, value in train_overrides.items() if value is not None}
    if args.seed is not None:
        overrides["seed"] = args.seed
        train_overrides["seed"] = args.seed
    if args.preset is not None:
        overrides["preset"] = args.preset
    if train_overrides:
        overrides["train"] = train_overrides
    patterns = pattern_overrides(args.pattern)
    if patterns:
        overrides["patterns"] = patterns

    run_cfg = load_run_config(args.config, overrides)
    service = TrainingService()
    _, history = service.run(run_cfg, args.data, args.out, pesq_client=PesqToolClient(args.pesq_cmd))

    last = history.records[-1]
    print(
        f"Training beendet nach {len(history)} Epochen: train MSE {last.train_mse:.6f}, "
        f"val SI-SDR {format_optional(last.val_si_sdr, 2)} dB, val STOI {format_optional(last.val_stoi)}"
    )
    return 0

def cmd_enhance(args: argparse.Namespace) -> int:
    """Verbessert eine Szene mit einem gespeicherten Modell."""
    model, state = load_checkpoint(args.checkpoint)
    manifest = load_manifest(args.data, patterns=resolve_patterns(args))
    scene = load_scene(
        manifest,
        args.scene,
        num_samples=int(state.extra.get("clip_samples", CLIP_SAMPLES)),
        num_frames=int(state.extra.get("clip_frames", CLIP_FRAMES)),
        frame_size=state.config.video.image_size,
    )
    clip = TrainingService().enhance(model, scene)
    save_wav(clip, args.out)
    print(f"Verbesserte Szene {args.scene} geschrieben: {args.out}")
    return 0

def cmd_evaluate(args: argparse.Namespace) -> int:
    """Bewertet verbesserte Clips gegen Referenzen und schreibt den CSV-Bericht."""
    service = EvaluationService(PesqToolClient(args.pesq_cmd))
    # Mit --noisy-baseline ist ref-dir ein Szenenverzeichnis aus synth-data
    ref_pattern = args.ref_pattern or (TARGET_PATTERN if args.noisy_baseline else "{id}.wav")
    report = service.evaluate_dirs(args.ref_dir, args.est_dir, args.out,
                                   ref_pattern=ref_pattern, est_pattern=args.est_pattern)
    print(
        f"enhanced: PESQ {format_optional(report.pesq)}, STOI {format_optional(report.stoi)}, "
        f"SI-SDR {format_optional(report.si_sdr_db, 3)} dB ({len(report.clips)} Clips, {report.failures} Fehler)"
    )

    if args.noisy_baseline:
        out = Path(args.out)
        noisy_csv = str(out.with_name(f"{out.stem}_noisy{out.suffix}"))
        noisy = service.evaluate_noisy_baseline(args.ref_dir, noisy_csv, ref_pattern=ref_pattern,
                                                mix_pattern=args.mix_pattern)
        print(
            f"noisy:    PESQ {format_optional(noisy.pesq)}, STOI {format_optional(noisy.stoi)}, "
            f"SI-SDR {format_optional(noisy.si_sdr_db, 3)} dB ({noisy_csv})"
        )
    return 0

def cmd_grad_check(args: argparse.Namespace) -> int:
    """Gradientenprüfung auf der kleinen Konfiguration; Exit-Code 0 nur bei Erfolg."""
    report = grad_check(tolerance=args.tolerance, num_params=args.num_params, seed=args.seed)
    for module, stats in report.per_module.items():
        print(f"{module:14s} {stats['passed']:4d}/{stats['checked']:4d}")
    print(
        f"{report.passed_count}/{report.checked} Einträge mit relativem Fehler < {args.tolerance} "
        f"({report.pass_fraction:.1%}): {'BESTANDEN' if report.passed else 'NICHT BESTANDEN'}"
    )
    return 0 if report.passed else 1

def cmd_plot(args: argparse.Namespace) -> int:
    """Zeichnet einen Trainingsverlauf aus einer CSV-Datei."""
    plot_history(read_history_csv(args.history), args.out)
    print(f"Diagramm geschrieben: {args.out}")
    return 0

#
# Argumente
#

def add_pattern_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--pattern", action="append", default=None, metavar="NAME=MUSTER",
                        help=f"Dateinamensmuster überschreiben, NAME aus {', '.join(PATTERN_NAMES)}")

def build_parser() -> argparse.ArgumentParser:
    formatter = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="aurexa", description=f"{APP_NAME}: {APP_DESCRIPTION}",
                                     formatter_class=formatter)
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="BEFEHL")

    synth = subparsers.add_parser("synth-data", help="Synthetische Szenen erzeugen", formatter_class=formatter)
    synth.add_argument("--out", default=str(DATA_DIR), help="Zielverzeichnis")
    synth.add_argument("--count", type=int, default=8, help="Anzahl Szenen")
    synth.add_argument("--seed", type=int, default=0, help="Basis-Seed")
    synth.add_argument("--preset", choices=["tiny", "toy"], default="toy", help="Clip- und Framegröße")
    synth.add_argument("--dev-fraction", type=float, default=0.25, help="Anteil der dev-Szenen")
    synth.add_argument("--frames-format", choices=["tensor", "images"], default="tensor",
                       help="Frame-Tensor-Datei oder Bildverzeichnis")
    synth.add_argument("--config", default=None, help="JSON-Konfigurationsdatei (Abschnitt patterns)")
    add_pattern_argument(synth)
    synth.set_defaults(func=cmd_synth_data)

    train = subparsers.add_parser("train", help="Modell trainieren", formatter_class=formatter)
    train.add_argument("--config", default=None, help="JSON-Konfigurationsdatei")
    train.add_argument("--data", default=str(DATA_DIR), help="Szenenverzeichnis mit Manifest")
    train.add_argument("--out", default=str(RUNS_DIR / "run"), help="Ausgabeverzeichnis")
    train.add_argument("--preset", choices=["tiny", "toy", "full"], default=None, help="Modell-Preset")
    train.add_argument("--epochs", type=int, default=None, help="Anzahl Epochen")
    train.add_argument("--batch-size", type=int, default=None, help="Batchgröße")
    train.add_argument("--lr", type=float, default=None, help="Lernrate")
    train.add_argument("--optimizer", choices=["sgd-momentum", "adaptive-moment"], default=None, help="Optimierer")
    train.add_argument("--max-steps", type=int, default=None, help="Obergrenze der Optimierungsschritte")
    train.add_argument("--validate-every", type=int, default=None, help="Validierung alle N Epochen")
    train.add_argument("--seed", type=int, default=None, help="Seed für Modell und Training")
    train.add_argument("--pesq-cmd", default=None, help="PESQ-Befehl mit {ref} und {est} (sonst AUREXA_PESQ_CMD)")
    add_pattern_argument(train)
    train.set_defaults(func=cmd_train)

    enhance = subparsers.add_parser("enhance", help="Szene verbessern", formatter_class=formatter)
    enhance.add_argument("--checkpoint", required=True, help="Checkpoint-Datei")
    enhance.add_argument("--scene", required=True, help="Szenen-ID")
    enhance.add_argument("--data", default=str(DATA_DIR), help="Szenenverzeichnis mit Manifest")
    enhance.add_argument("--out", required=True, help="Ausgabe-WAV")
    enhance.add_argument("--config", default=None, help="JSON-Konfigurationsdatei (Abschnitt patterns)")
    add_pattern_argument(enhance)
    enhance.set_defaults(func=cmd_enhance)

    evaluate = subparsers.add_parser("evaluate", help="Clips bewerten", formatter_class=formatter)
    evaluate.add_argument("--ref-dir", required=True, help="Verzeichnis mit Referenzclips")
    evaluate.add_argument("--est-dir", required=True, help="Verzeichnis mit verbesserten Clips")
    evaluate.add_argument("--out", required=True, help="CSV-Bericht")
    evaluate.add_argument("--pesq-cmd", default=None, help="PESQ-Befehl mit {ref} und {est} (sonst AUREXA_PESQ_CMD)")
    evaluate.add_argument("--ref-pattern", default=None,
                          help="Dateiname der Referenz (Standard: {id}.wav, mit --noisy-baseline {id}_target.wav)")
    evaluate.add_argument("--est-pattern", default="{id}.wav", help="Dateiname der Schätzung")
    evaluate.add_argument("--noisy-baseline", action="store_true",
                          help="Zusätzlich die unverarbeiteten Mischungen aus --ref-dir bewerten")
    evaluate.add_argument("--mix-pattern", default=MIXTURE_PATTERN, help="Dateiname der Mischung")
    evaluate.set_defaults(func=cmd_evaluate)

    check = subparsers.add_parser("grad-check", help="Gradientenprüfung", formatter_class=formatter)
    check.add_argument("--tolerance", type=float, default=1e-3, help="Grenze für den relativen Fehler")
    check.add_argument("--num-params", type=int, default=200, help="Anzahl geprüfter Parametereinträge")
    check.add_argument("--seed", type=int, default=0, help="Seed")
    check.set_defaults(func=cmd_grad_check)

    plot = subparsers.add_parser("plot", help="Trainingsverlauf zeichnen", formatter_class=formatter)
    plot.add_argument("--history", required=True, help="Verlauf als CSV")
    plot.add_argument("--out", required=True, help="Bilddatei")
    plot.set_defaults(func=cmd_plot)

    return parser

def main(argv: Optional[List[str]] = None) -> int:
    """
    Führt einen Unterbefehl aus.

    Args:
        argv: Argumente ohne Programmnamen (Standard: sys.argv[1:])

    Returns:
        Exit-Code
    """
    logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        return args.func(args)
    except (AurexaError, OSError, ValueError) as e:
        handle_exception(e, log_level=logging.DEBUG)
        print(format_exception(e), file=sys.stderr)
        return 1

if __name__ == "__main__":
    sys.exit(main())
