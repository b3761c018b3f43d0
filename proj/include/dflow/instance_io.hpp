#pragma once

#include <iosfwd>
#include <string>

#include "dflow/network.hpp"

namespace dflow {

/// Parses the JSON instance format. Unknown top-level or edge fields are
/// rejected; an optional object-valued "meta" field is accepted and ignored.
/// Throws ParseError.
Network parse_network(const std::string& text);
Network read_network(const std::string& path);

/// Serializes a network; `meta_json` (a JSON object as text, may be empty) is
/// echoed in the "meta" field.
std::string dump_network(const Network& network, const std::string& meta_json = "");
void write_network(const std::string& path, const Network& network,
                   const std::string& meta_json = "");

}  // namespace dflow
