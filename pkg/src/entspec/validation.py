"""JSON Schemas for CLI output, one file per subcommand under ``schemas/``."""
import json
from functools import lru_cache
from importlib import resources

import jsonschema


@lru_cache(maxsize=None)
def load_schema(command):
    text = resources.files("entspec").joinpath("schemas", f"{command}.json").read_text()
    return json.loads(text)


def validate(command, obj):
    """Raise ``jsonschema.ValidationError`` if ``obj`` does not match."""
    jsonschema.validate(obj, load_schema(command))
    return obj
