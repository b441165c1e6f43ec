/*
 * Copyright 2026 The repscope Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Umbrella header for the repscope library.

#ifndef REPSCOPE_REPSCOPE_HPP_
#define REPSCOPE_REPSCOPE_HPP_

#include "repscope/activation_stats.hpp"
#include "repscope/checkpoint_interp.hpp"
#include "repscope/cka.hpp"
#include "repscope/concept_probe.hpp"
#include "repscope/error.hpp"
#include "repscope/head_analysis.hpp"
#include "repscope/io.hpp"
#include "repscope/npy.hpp"
#include "repscope/parallel.hpp"
#include "repscope/pipeline.hpp"
#include "repscope/report.hpp"
#include "repscope/types.hpp"
#include "repscope/zeroshot.hpp"

#endif  // REPSCOPE_REPSCOPE_HPP_
