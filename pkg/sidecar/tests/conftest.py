"""Tiny randomly-initialized BERT fixture: fast, offline, deterministic."""

from __future__ import annotations

import pytest
import torch
from starlette.testclient import TestClient
from tokenizers import Tokenizer, models, normalizers, pre_tokenizers
from transformers import BertConfig, BertForMaskedLM, PreTrainedTokenizerFast

from mlm_sidecar.app import create_app
from mlm_sidecar.config import Settings
from mlm_sidecar.modeling import ModelBundle

VOCAB = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    ".", ",", "a", "s", "the", "cat", "sat", "mat", "dog", "ran",
    "rain", "fell", "road", "flood", "##ed", "##ing", "##s", "play",
    "market", "water", "river", "bank", "big", "sun", "sky", "tree",
    "bird", "fish", "stone", "green", "house", "walk", "talk", "wind",
]


@pytest.fixture(scope="session")
def settings() -> Settings:
    return Settings(
        model_name="tiny-test-bert",
        device="cpu",
        max_input_len=32,
        max_batch=8,
        max_sessions=2,
        deterministic=True,
        epochs=2,
        learning_rate=1e-3,
    )


@pytest.fixture(scope="session")
def bundle(settings) -> ModelBundle:
    wordpiece = Tokenizer(
        models.WordPiece(
            vocab={word: i for i, word in enumerate(VOCAB)},
            unk_token="[UNK]",
            continuing_subword_prefix="##",
        )
    )
    wordpiece.normalizer = normalizers.BertNormalizer(lowercase=True)
    wordpiece.pre_tokenizer = pre_tokenizers.BertPreTokenizer()
    tokenizer = PreTrainedTokenizerFast(
        tokenizer_object=wordpiece,
        unk_token="[UNK]", pad_token="[PAD]", cls_token="[CLS]",
        sep_token="[SEP]", mask_token="[MASK]",
    )
    config = BertConfig(
        vocab_size=len(VOCAB),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=64,
    )
    torch.manual_seed(0)
    model = BertForMaskedLM(config)
    return ModelBundle(tokenizer, model, settings, identity="tiny-test-bert@fixture")


@pytest.fixture()
def client(bundle, settings):
    with TestClient(create_app(bundle=bundle, settings=settings)) as c:
        yield c
