// Copyright 2026 The vcd Authors
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

#include "vcd/alignment.hpp"
#include "vcd/config.hpp"
#include "vcd/descriptor.hpp"
#include "vcd/error.hpp"
#include "vcd/evaluation.hpp"
#include "vcd/pca.hpp"
#include "vcd/pipeline.hpp"
#include "vcd/postproc.hpp"
#include "vcd/retrieval.hpp"
#include "vcd/simgen.hpp"
#include "vcd/vdsc.hpp"
#include "vcd/views.hpp"

namespace vcd {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace vcd
