#include "sniffwatch/signatures.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>

namespace sniffwatch {
namespace {

std::vector<std::uint8_t> ascii_bytes(std::string_view s) { return {s.begin(), s.end()}; }

std::vector<std::uint8_t> decode_hex(std::string_view hex, std::size_t line) {
  if (hex.size() % 2 != 0) {
    throw SignatureError(SignatureError::Kind::MalformedSignatureFile, line,
                         fmt::format("line {}: hex value has odd length", line));
  }
  std::vector<std::uint8_t> out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    unsigned v = 0;
    auto [ptr, ec] = std::from_chars(hex.data() + i, hex.data() + i + 2, v, 16);
    if (ec != std::errc{} || ptr != hex.data() + i + 2) {
      throw SignatureError(SignatureError::Kind::MalformedSignatureFile, line,
                           fmt::format("line {}: bad hex digit in value", line));
    }
    out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

}  // namespace

SignatureSet::SignatureSet(std::vector<Signature> signatures)
    : signatures_(std::move(signatures)) {
  std::set<std::string> seen;
  for (const auto& sig : signatures_) {
    if (sig.pattern.empty()) {
      throw SignatureError(SignatureError::Kind::EmptyPattern, 0,
                           fmt::format("signature {} has an empty pattern", sig.id));
    }
    if (!seen.insert(sig.id).second) {
      throw SignatureError(SignatureError::Kind::DuplicateId, 0,
                           fmt::format("duplicate signature id {}", sig.id));
    }
    max_pattern_length_ = std::max(max_pattern_length_, sig.pattern.size());
  }
}

const Signature* SignatureSet::find(const std::string& id) const {
  auto it = std::find_if(signatures_.begin(), signatures_.end(),
                         [&](const Signature& s) { return s.id == id; });
  return it == signatures_.end() ? nullptr : &*it;
}

SignatureSet default_signatures() {
  return SignatureSet({
      {"SIG-001", "linuxpir8-mail", ascii_bytes("LinuxPir8 [at] yahoo.com")},
      {"SIG-002", "abort-mail", ascii_bytes("abort [at] yahoo.com")},
      {"SIG-003", "hpftp-size", ascii_bytes("File size:14140")},
  });
}

SignatureSet parse_signatures(std::istream& in) {
  std::vector<Signature> sigs;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;

    std::string_view rest = line;
    std::string_view fields[3];
    for (auto& field : fields) {
      const auto tab = rest.find('\t');
      if (tab == std::string_view::npos) {
        throw SignatureError(SignatureError::Kind::MalformedSignatureFile, line_no,
                             fmt::format("line {}: expected id<TAB>name<TAB>kind<TAB>value",
                                         line_no));
      }
      field = rest.substr(0, tab);
      rest.remove_prefix(tab + 1);
    }
    const auto [id, name, kind] = std::tie(fields[0], fields[1], fields[2]);
    if (id.empty()) {
      throw SignatureError(SignatureError::Kind::MalformedSignatureFile, line_no,
                           fmt::format("line {}: empty id field", line_no));
    }

    Signature sig{std::string(id), std::string(name), {}};
    if (kind == "ascii") {
      sig.pattern = ascii_bytes(rest);
    } else if (kind == "hex") {
      sig.pattern = decode_hex(rest, line_no);
    } else {
      throw SignatureError(SignatureError::Kind::MalformedSignatureFile, line_no,
                           fmt::format("line {}: unknown kind '{}'", line_no, kind));
    }
    if (sig.pattern.empty()) {
      throw SignatureError(SignatureError::Kind::EmptyPattern, line_no,
                           fmt::format("line {}: signature {} has an empty pattern", line_no,
                                       sig.id));
    }
    if (!seen.insert(sig.id).second) {
      throw SignatureError(SignatureError::Kind::DuplicateId, line_no,
                           fmt::format("line {}: duplicate signature id {}", line_no, sig.id));
    }
    sigs.push_back(std::move(sig));
  }
  return SignatureSet(std::move(sigs));
}

SignatureSet load_signatures(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw SignatureError(SignatureError::Kind::IoFailure, 0,
                         fmt::format("cannot open signature file '{}'", path));
  }
  return parse_signatures(in);
}

std::vector<SignatureMatch> match_signatures(FlowCarryBuffer& buffer, ByteView payload,
                                             const SignatureSet& sigs) {
  std::vector<SignatureMatch> matches;
  if (payload.empty()) return matches;

  std::vector<std::uint8_t> window;
  window.reserve(buffer.tail.size() + payload.size());
  window.insert(window.end(), buffer.tail.begin(), buffer.tail.end());
  window.insert(window.end(), payload.begin(), payload.end());
  const auto window_start = buffer.stream_offset - buffer.tail.size();

  std::vector<std::pair<std::size_t, std::size_t>> found;  // (window pos, signature index)
  const auto& list = sigs.signatures();
  for (std::size_t s = 0; s < list.size(); ++s) {
    const auto& pattern = list[s].pattern;
    const std::boyer_moore_horspool_searcher searcher(pattern.begin(), pattern.end());
    auto cursor = window.begin();
    while (true) {
      const auto [first, last] = searcher(cursor, window.end());
      if (first == window.end()) break;
      const auto pos = static_cast<std::size_t>(first - window.begin());
      // Occurrences wholly inside the tail were reported with an earlier segment.
      if (pos + pattern.size() > buffer.tail.size()) found.emplace_back(pos, s);
      cursor = first + 1;
    }
  }
  std::sort(found.begin(), found.end());
  for (const auto& [pos, s] : found) {
    matches.push_back(SignatureMatch{list[s].id, window_start + pos});
  }

  const auto keep = std::min(window.size(), sigs.max_pattern_length() > 0
                                                ? sigs.max_pattern_length() - 1
                                                : std::size_t{0});
  buffer.tail.assign(window.end() - static_cast<long>(keep), window.end());
  buffer.stream_offset += payload.size();
  return matches;
}

}  // namespace sniffwatch
