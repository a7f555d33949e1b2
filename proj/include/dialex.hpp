// Copyright 2026 The dialex Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "dialex/annotation_store.hpp"
#include "dialex/baselines.hpp"
#include "dialex/chat_client.hpp"
#include "dialex/config.hpp"
#include "dialex/corpus.hpp"
#include "dialex/dataset.hpp"
#include "dialex/error.hpp"
#include "dialex/label.hpp"
#include "dialex/levenshtein.hpp"
#include "dialex/llm_runner.hpp"
#include "dialex/manifest.hpp"
#include "dialex/matcher.hpp"
#include "dialex/metrics.hpp"
#include "dialex/neighbor_index.hpp"
#include "dialex/pipeline.hpp"
#include "dialex/pos.hpp"
#include "dialex/prompts.hpp"
#include "dialex/random.hpp"
#include "dialex/service.hpp"
#include "dialex/unicode.hpp"
#include "dialex/vocab.hpp"
