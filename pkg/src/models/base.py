from pydantic import BaseModel, ConfigDict


class SimBaseModel(BaseModel):
    """Strict, immutable base for scenario documents and summary records."""

    model_config = ConfigDict(
        populate_by_name=True,
        frozen=True,
        extra='forbid'
    )
