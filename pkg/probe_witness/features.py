import os


def parallel_scan_enabled() -> bool:
    """
    Whether scan grid points are evaluated in a thread pool. Rows stay ordered by parameter value.
    Defaults to False
    """
    return get_feature("PARALLEL_SCAN", False)


def svg_plot_enabled() -> bool:
    """
    Whether pattern runs write an SVG fringe plot even without --svg. Defaults to False.
    """
    return get_feature("SVG_PLOT", False)


def get_feature(feature: str, default: bool) -> bool:
    """
    Gets a feature from the environment.
    """
    default_str = "true" if default else "false"
    return os.getenv(f"FEATURE_{feature}", default_str).lower() == "true"
