from pathlib import Path

import eqsimp

PACKAGE = Path(eqsimp.__file__).parent


def test_compiled_modules_are_not_stale():
    # a compiled module shadows its source: rebuild after editing the .py
    for ext in PACKAGE.glob("*.so"):
        source = PACKAGE / (ext.name.split(".")[0] + ".py")
        assert source.exists(), ext.name
        assert ext.stat().st_mtime >= source.stat().st_mtime, f"{ext.name} is older than {source.name}"
