//------------------------------------------------------------------------------
//
//   Copyright 2026 The qmachine Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#pragma once

#include "qmachine/common.hpp"
#include "qmachine/machine.hpp"
#include "qmachine/document.hpp"
#include "qmachine/classical.hpp"
#include "qmachine/pair_merger.hpp"
#include "qmachine/q_machine.hpp"
#include "qmachine/processes.hpp"
#include "qmachine/analysis.hpp"
#include "qmachine/studies.hpp"
