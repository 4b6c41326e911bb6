#pragma once

// Instance file formats. See docs/formats.md for the exact layouts.

#include <filesystem>
#include <string>
#include <variant>

#include "hvrp/instances.hpp"

namespace hvrp {

MdvrpInstance parse_cordeau(const std::string& text, const std::string& source = "<cordeau>");
std::string format_cordeau(const MdvrpInstance& inst);

CvrpInstance parse_tsplib_cvrp(const std::string& text, const std::string& source = "<tsplib>");
std::string format_tsplib_cvrp(const CvrpInstance& inst);

ClrpInstance parse_barreto(const std::string& text, const std::string& source = "<barreto>");
std::string format_barreto(const ClrpInstance& inst);

std::string to_json(const CvrpInstance& inst);
std::string to_json(const MdvrpInstance& inst);
std::string to_json(const ClrpInstance& inst);

using AnyInstance = std::variant<CvrpInstance, MdvrpInstance, ClrpInstance>;

/// Parses a JSON instance document of any kind.
AnyInstance instance_from_json(const std::string& text, const std::string& source = "<json>");

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Loads an instance, detecting the format: JSON (".json" or leading '{'),
/// TSPLIB-like (NODE_COORD_SECTION present), Cordeau (first line holds four
/// integers), otherwise Barreto. The name defaults to the file stem.
AnyInstance load_instance(const std::filesystem::path& path);

MdvrpInstance load_mdvrp(const std::filesystem::path& path);
CvrpInstance load_cvrp(const std::filesystem::path& path);
ClrpInstance load_clrp(const std::filesystem::path& path);

/// Writes JSON for ".json" paths, otherwise the native text format of the
/// instance kind (TSPLIB-like, Cordeau, Barreto).
void write_instance(const AnyInstance& inst, const std::filesystem::path& path);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_number(double v);

}  // namespace hvrp
