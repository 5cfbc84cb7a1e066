import sys
from pathlib import Path
from types import SimpleNamespace

import numpy as np
import pytest
from PIL import Image

# Make sibling helper modules (reference tables, shared fixtures) importable.
sys.path.insert(0, str(Path(__file__).parent))


def write_block_images(folder: Path, count: int = 3, size: int = 32, seed: int = 7) -> None:
    """Five-vertical-block images: colorful and easy to overfit."""
    rng = np.random.default_rng(seed)
    folder.mkdir(parents=True, exist_ok=True)
    for i in range(count):
        colors = rng.integers(0, 256, size=(5, 3), dtype=np.uint8)
        width = size // 5
        blocks = [
            np.full((size, width if j < 4 else size - 4 * width, 3), colors[j], dtype=np.uint8)
            for j in range(5)
        ]
        Image.fromarray(np.concatenate(blocks, axis=1), "RGB").save(folder / f"img{i:02d}.png")


@pytest.fixture(scope="session")
def toy_checkpoints(tmp_path_factory):
    """Small, quickly trained checkpoints for service/CLI wiring tests."""
    from paletteforge.data import save_pat, synthetic_records
    from paletteforge.training import TrainConfig, train_pcn, train_tpn

    root = tmp_path_factory.mktemp("toy-checkpoints")
    records = synthetic_records(12, seed=100)
    data_path = root / "records.ndjson"
    save_pat(records, data_path)

    tpn_config = TrainConfig(
        epochs=6, batch_size=4, seed=0,
        embed_dim=16, enc_hidden=16, cond_dim=16, dec_hidden=16,
    )
    train_tpn(records, tpn_config, out_dir=root / "tpn")

    images = root / "images"
    write_block_images(images, count=3, size=32)
    pcn_config = TrainConfig(
        epochs=4, batch_size=2, seed=0, lambda_huber=10.0, base_width=4, image_size=16
    )
    train_pcn(images, pcn_config, out_dir=root / "pcn")

    return SimpleNamespace(
        tpn=root / "tpn" / "tpn.pt",
        pcn=root / "pcn" / "pcn.pt",
        data=data_path,
        images=images,
        records=records,
    )
