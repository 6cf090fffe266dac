// Copyright 2026 The vemorph Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VEMORPH_RESOURCES_HPP_
#define VEMORPH_RESOURCES_HPP_

#include <string_view>

// Resource files compiled into the library (see core/resources/).
namespace vemorph::resources {

std::string_view extraction_prompt();
std::string_view icl_pool();
std::string_view synonym_lexicon();

}  // namespace vemorph::resources

#endif  // VEMORPH_RESOURCES_HPP_
