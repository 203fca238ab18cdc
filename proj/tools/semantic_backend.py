#!/usr/bin/env python3
# Copyright (c) the SELIC Project Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Pretrained semantic helper: BLIP captions, BERT text embeddings.

Set SELIC_SEMANTIC_HELPER="python3 tools/semantic_backend.py" to use it with
semantic.backend=pretrained. Weights are loaded read-only in eval mode.
"""
import hashlib
import os
import struct
import sys

CAPTION_MODEL = os.environ.get("SELIC_CAPTION_MODEL", "Salesforce/blip-image-captioning-base")
TEXT_MODEL = os.environ.get("SELIC_TEXT_MODEL", "bert-base-uncased")
MAX_TOKENS = 64


def _captioner():
    from transformers import BlipForConditionalGeneration, BlipProcessor

    processor = BlipProcessor.from_pretrained(CAPTION_MODEL)
    model = BlipForConditionalGeneration.from_pretrained(CAPTION_MODEL).eval()
    return processor, model


def _encoder():
    from transformers import AutoModel, AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(TEXT_MODEL)
    model = AutoModel.from_pretrained(TEXT_MODEL).eval()
    return tokenizer, model


def caption(path):
    import torch
    from PIL import Image

    processor, model = _captioner()
    image = Image.open(path).convert("RGB")
    inputs = processor(images=image, return_tensors="pt")
    with torch.no_grad():
        out = model.generate(**inputs, max_new_tokens=MAX_TOKENS, num_beams=1, do_sample=False)
    print(processor.decode(out[0], skip_special_tokens=True).strip())


def embed(caption_path, out_path):
    import torch

    tokenizer, model = _encoder()
    with open(caption_path, encoding="utf-8") as f:
        text = f.read().strip()
    if not text:
        sys.exit("empty caption")
    inputs = tokenizer(text, return_tensors="pt", truncation=True, max_length=MAX_TOKENS + 2)
    with torch.no_grad():
        hidden = model(**inputs).last_hidden_state[0, 0]
    with open(out_path, "wb") as f:
        f.write(struct.pack("<%df" % hidden.numel(), *hidden.tolist()))


def checksum():
    import torch

    digest = hashlib.sha256()
    for load in (_captioner, _encoder):
        model = load()[1]
        for name, tensor in sorted(model.state_dict().items()):
            digest.update(name.encode())
            digest.update(tensor.to(torch.float32).contiguous().numpy().tobytes())
    print(int.from_bytes(digest.digest()[:8], "little"))


def main(argv):
    if argv == ["id"]:
        print(f"{CAPTION_MODEL}+{TEXT_MODEL}")
    elif len(argv) == 2 and argv[0] == "caption":
        caption(argv[1])
    elif len(argv) == 3 and argv[0] == "embed":
        embed(argv[1], argv[2])
    elif argv == ["checksum"]:
        checksum()
    else:
        sys.exit("usage: semantic_backend.py id | caption IMAGE | embed CAPTION OUT | checksum")


if __name__ == "__main__":
    main(sys.argv[1:])
