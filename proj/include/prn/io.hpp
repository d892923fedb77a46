// Copyright (c) 2026 the PRN authors
// Licensed under the MIT license.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace prn {

// Shortest round-trip decimal form, locale independent. Used for every
// numeric value written to an artifact file so reruns are byte identical.
std::string format_double(double x);

// FNV-1a over a byte string; provenance fingerprints for model files.
std::uint64_t fnv1a(const std::string& bytes);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
bool file_exists(const std::string& path);

// "key = value" lines; '#' starts a comment; later keys override earlier ones.
std::map<std::string, std::string> read_key_value_file(const std::string& path);

std::vector<std::string> split_fields(const std::string& line, char delim);
std::string trim(const std::string& s);

double parse_double(const std::string& s);  // throws on garbage
long parse_long(const std::string& s);

}  // namespace prn
