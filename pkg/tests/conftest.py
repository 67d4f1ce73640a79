import pathlib
import sys

# allow running the tests from a source checkout without installation
_src = pathlib.Path(__file__).resolve().parent.parent / "src"
if _src.is_dir() and str(_src) not in sys.path:
    try:
        import nosekam  # noqa: F401
    except ImportError:
        sys.path.insert(0, str(_src))
