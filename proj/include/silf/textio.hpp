/**
 * Copyright 2026 The SILF Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SILF_TEXTIO_HPP_
#define SILF_TEXTIO_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace silf {

// 17 significant digits; strtod of the result reproduces the value exactly.
std::string FormatExact(double v);
// Throws kParse with `where` prefixed.
double ParseDouble(std::string_view text, const std::string &where);
long long ParseInt(std::string_view text, const std::string &where);

std::vector<std::string> SplitLines(const std::string &text);
std::vector<std::string> SplitCsv(std::string_view line);

std::string ReadFile(const std::string &path);
void WriteFile(const std::string &path, const std::string &contents);
bool FileExists(const std::string &path);

}  // namespace silf

#endif  // SILF_TEXTIO_HPP_
