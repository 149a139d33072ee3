from typing import Any, Dict

import yaml

from .exceptions import ConfigurationError
from .util import TextSource, open_text


def load_yaml_mapping(source: TextSource) -> Dict[str, Any]:
    """Load a YAML configuration document that must be a mapping.
    Keys with dashes are normalized to underscores so that config files
    can use the same spelling as command line flags

    :param source: path or stream of the YAML document
    :return: the mapping, empty if the document is empty
    """
    with open_text(source) as f:
        try:
            data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigurationError(f"Invalid YAML config: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigurationError(
            f"Config must be a mapping, got {type(data).__name__}"
        )
    return {str(k).replace("-", "_"): v for k, v in data.items()}
