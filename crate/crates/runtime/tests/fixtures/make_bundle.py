"""Builds the tiny test bundle in ./bundle and the expected embeddings.

The visual encoder is a small random convolutional network, not a real
vision-language model; it only exercises the bundle format and the ONNX
execution path. Run with python3 (needs torch and onnx).
"""
import hashlib
import json
import os

import numpy as np
import torch

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "bundle")
SIZE = 32
DIM = 8
MEAN = [0.48145466, 0.4578275, 0.40821073]
STD = [0.26862954, 0.26130258, 0.27577711]
PROMPTS = ["high quality", "low quality", "a good photo", "a bad photo"]


class Tiny(torch.nn.Module):
    def __init__(self):
        super().__init__()
        self.conv = torch.nn.Conv2d(3, 6, kernel_size=4, stride=4)
        self.proj = torch.nn.Linear(6, DIM)

    def forward(self, x):
        h = torch.relu(self.conv(x))
        return self.proj(h.mean(dim=(2, 3)))


def test_frame(k):
    """Deterministic RGB test frame k as an (H, W, 3) uint8-valued array."""
    y, x, c = np.meshgrid(np.arange(SIZE), np.arange(SIZE), np.arange(3), indexing="ij")
    return ((x * 7 + y * 13 + c * 50 + k * 40) % 256).astype(np.float32)


def main():
    torch.manual_seed(3)
    os.makedirs(OUT, exist_ok=True)
    model = Tiny().eval()
    dummy = torch.zeros(1, 3, SIZE, SIZE)
    torch.onnx.export(model, dummy, os.path.join(OUT, "visual.onnx"), opset_version=13,
                      input_names=["pixels"], output_names=["embedding"], dynamo=False)

    rng = np.random.default_rng(11)
    with open(os.path.join(OUT, "text.txt"), "w") as fh:
        for p in PROMPTS:
            vec = rng.standard_normal(DIM).astype(np.float32)
            fh.write(p + " " + str(DIM) + " " + " ".join(repr(float(v)) for v in vec) + "\n")

    digests = {}
    for name in ("visual.onnx", "text.txt"):
        with open(os.path.join(OUT, name), "rb") as fh:
            digests[name] = hashlib.sha256(fh.read()).hexdigest()
    manifest = {
        "format": "ouvqa-embedding-bundle", "version": 1, "dimension": DIM, "input_size": SIZE,
        "mean": MEAN, "std": STD, "visual_model": "visual.onnx", "text_embeddings": "text.txt",
        "sha256": digests,
    }
    with open(os.path.join(OUT, "bundle.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)

    expected = []
    mean = torch.tensor(MEAN).view(1, 3, 1, 1)
    std = torch.tensor(STD).view(1, 3, 1, 1)
    for k in range(3):
        x = torch.from_numpy(test_frame(k)).permute(2, 0, 1)[None] / 255.0
        with torch.no_grad():
            emb = model((x - mean) / std)[0]
        expected.append(emb.tolist())
    with open(os.path.join(HERE, "expected_embeddings.json"), "w") as fh:
        json.dump(expected, fh)


if __name__ == "__main__":
    main()
