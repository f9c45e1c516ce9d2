"""Pull ATPF tensors out of a matched ViT/CLIP vision-text pair.

The vision and text towers must come from the same pretrained pairing so
their similarity operates in one embedding space. From the vision tower we
take the final layer's patch hidden states (pre-projection, CLS dropped)
and its full multi-head attention; from the text tower the projected prompt
embedding. When the visual width differs from the projection space, the
model's own visual-projection matrix is exported alongside, so the
consuming engine decides whether to apply it rather than having the choice
baked into the file.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .atpf import ExportShapeError, write_atpf


@dataclass(frozen=True)
class ExportRequest:
    model_id: str
    image_path: str
    prompt: str
    out_path: str
    device: str = "cpu"


def load_model_and_processor(model_id: str, device: str = "cpu"):
    """Load a CLIP-family model (eager attention, eval mode) plus processor."""
    from transformers import CLIPModel, CLIPProcessor

    model = CLIPModel.from_pretrained(model_id, attn_implementation="eager")
    model.to(device)
    model.eval()
    processor = CLIPProcessor.from_pretrained(model_id)
    return model, processor


def extract_tensors(model, pixel_values, input_ids, attention_mask=None):
    """Run both towers and return (tensors, metadata) for one image/prompt.

    pixel_values: [1, C, H, W]; input_ids: [1, T]. Returns float32 numpy
    tensors keyed by their ATPF names and the shape metadata that goes into
    the manifest.
    """
    import torch

    if pixel_values.shape[0] != 1 or input_ids.shape[0] != 1:
        raise ExportShapeError("export runs one image/prompt pair at a time")

    with torch.no_grad():
        vision_out = model.vision_model(
            pixel_values=pixel_values, output_attentions=True
        )
        text_out = model.get_text_features(
            input_ids=input_ids, attention_mask=attention_mask
        )

    hidden = vision_out.last_hidden_state[0]      # [(1+N), D_v], CLS at 0
    attention = vision_out.attentions[-1][0]      # [H, 1+N, 1+N]
    text = text_out if torch.is_tensor(text_out) else text_out.pooler_output
    text = text[0]                                # [D_t]

    n = hidden.shape[0] - 1
    d_v = hidden.shape[1]
    d_t = text.shape[0]
    if attention.shape[-1] != n + 1 or attention.shape[-2] != n + 1:
        raise ExportShapeError(
            f"attention grid {tuple(attention.shape)} does not match {n} patches"
        )

    vision_cfg = model.config.vision_config
    grid = vision_cfg.image_size // vision_cfg.patch_size
    if grid * grid != n:
        raise ExportShapeError(
            f"{n} patches do not form the {grid}x{grid} grid the config implies"
        )

    tensors = {
        "patch_embeddings": hidden[1:].cpu().numpy().astype(np.float32),
        "attention": attention.cpu().numpy().astype(np.float32),
        "text_embedding": text.cpu().numpy().astype(np.float32),
    }
    if d_v != d_t:
        proj = model.visual_projection.weight    # [D_t, D_v]
        tensors["projection"] = proj.detach().T.cpu().numpy().astype(np.float32)

    metadata = {
        "n_patches": n,
        "d_visual": d_v,
        "d_text": d_t,
        "heads": int(attention.shape[0]),
        "grid_rows": grid,
        "grid_cols": grid,
    }
    return tensors, metadata


def export_fixture(req: ExportRequest) -> None:
    """Full path: load model + image, run both towers, write the container."""
    from PIL import Image

    model, processor = load_model_and_processor(req.model_id, req.device)
    image = Image.open(req.image_path).convert("RGB")
    inputs = processor(
        images=image, text=[req.prompt], return_tensors="pt", padding=True
    )

    tensors, metadata = extract_tensors(
        model,
        inputs["pixel_values"].to(req.device),
        inputs["input_ids"].to(req.device),
        inputs.get("attention_mask"),
    )
    metadata["prompt"] = req.prompt
    metadata["model_id"] = req.model_id
    write_atpf(req.out_path, tensors, metadata)
