#ifndef SABCI_SHA256_HPP
#define SABCI_SHA256_HPP

#include <cstddef>
#include <cstdint>
#include <string>

namespace sabci {

// Incremental SHA-256 (FIPS 180-4), used for artifact content hashes.
class Sha256 {
public:
    Sha256();
    void update(const void* data, std::size_t len);
    std::string hex_digest(); // finalizes

    static std::string of_string(const std::string& s);

private:
    void process_block(const std::uint8_t* block);

    std::uint32_t state_[8];
    std::uint8_t buffer_[64];
    std::size_t buffered_ = 0;
    std::uint64_t total_bits_ = 0;
};

} // namespace sabci

#endif
