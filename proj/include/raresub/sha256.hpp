#ifndef RARESUB_SHA256_HPP
#define RARESUB_SHA256_HPP

#include <string>
#include <string_view>

namespace raresub {

// FIPS 180-4 SHA-256, lowercase hex digest.
std::string sha256_hex(std::string_view data);
std::string sha256_file_hex(const std::string& path);

}  // namespace raresub

#endif
