#pragma once

#include <filesystem>
#include <iosfwd>

#include "adgkt/model.hpp"

namespace adgkt {

// Checkpoint layout: one line of JSON (the header, terminated by '\n')
// describing scene shape, architecture and every layer's shape, followed by
// the parameters as little-endian IEEE-754 doubles in component order, each
// layer's weight (row-major) before its bias.

void write_checkpoint(const ModelBundle& model, std::ostream& out);
ModelBundle read_checkpoint(std::istream& in);

void save_checkpoint(const ModelBundle& model, const std::filesystem::path& path);
ModelBundle load_checkpoint(const std::filesystem::path& path);

}  // namespace adgkt
