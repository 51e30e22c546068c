#include <fluorsep/random.hpp>

namespace fluorsep {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

} // namespace

std::uint64_t stream_seed(std::uint64_t root, std::string_view name, std::uint64_t a,
                          std::uint64_t b) {
    std::uint64_t h = 0xCBF29CE484222325ull; // FNV-1a over the stream name
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    std::uint64_t s = splitmix64(root ^ splitmix64(h));
    s = splitmix64(s ^ splitmix64(a + 0x632BE59BD9B4E019ull));
    s = splitmix64(s ^ splitmix64(b + 0x85157AF5ull));
    return s;
}

} // namespace fluorsep
