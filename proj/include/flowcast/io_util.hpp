// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

namespace flowcast {

// Reads a whole file; throws IoError if it cannot be opened or read.
std::string read_text_file(const std::string& path);

// Writes text to `path` atomically: writes to a sibling temp file, flushes,
// then renames over the target. Throws IoError on failure.
void write_text_file_atomic(const std::string& path, const std::string& text);

}  // namespace flowcast
