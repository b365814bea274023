"""
Formatierungs-Hilfsfunktionen für AUREXA-SE
-------------------------------------------
Lesbare Darstellung von Parameterzahlen, Modellgrößen und Laufzeiten.
"""

def format_param_count(count: int) -> str:
    """
    Konvertiert eine Parameteranzahl in ein lesbares Format.

    Args:
        count: Anzahl der Parameter

    Returns:
        Formatierte Anzahl (z.B. "2.41 M")
    """
    if count < 1000:
        return str(count)

    units = ['', 'K', 'M', 'G']
    i = 0
    value = float(count)

    while value >= 1000.0 and i < len(units) - 1:
        value /= 1000.0
        i += 1

    return f"{value:.2f} {units[i]}"

def format_model_size(count: int, bytes_per_param: int = 4) -> str:
    """Größe der Parameter in MB (float32 entspricht 4 Byte pro Parameter)."""
    return f"{count * bytes_per_param / 1e6:.3f} MB"

def format_duration(seconds: float) -> str:
    """
    Formatiert eine Dauer in Sekunden.

    Args:
        seconds: Dauer in Sekunden

    Returns:
        Formatierte Dauer (z.B. "1 h 02 min", "3.4 s")
    """
    if seconds < 60:
        return f"{seconds:.1f} s"
    minutes, sec = divmod(int(round(seconds)), 60)
    if minutes < 60:
        return f"{minutes} min {sec:02d} s"
    hours, minutes = divmod(minutes, 60)
    return f"{hours} h {minutes:02d} min"

def format_optional(value, digits: int = 3) -> str:
    """Formatiert einen optionalen Messwert; fehlende Werte werden als leerer String dargestellt."""
    if value is None:
        return ""
    return f"{value:.{digits}f}"
