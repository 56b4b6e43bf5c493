#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "sniffwatch/net_types.hpp"

namespace sniffwatch {

struct Signature {
  std::string id;
  std::string name;
  std::vector<std::uint8_t> pattern;

  friend bool operator==(const Signature&, const Signature&) = default;
};

class SignatureError : public std::runtime_error {
 public:
  enum class Kind { MalformedSignatureFile, DuplicateId, EmptyPattern, IoFailure };

  SignatureError(Kind kind, std::size_t line, const std::string& what)
      : std::runtime_error(what), kind_(kind), line_(line) {}

  Kind kind() const { return kind_; }
  std::size_t line() const { return line_; }  // 1-based, 0 when not line specific

 private:
  Kind kind_;
  std::size_t line_;
};

// Immutable, validated signature list.
class SignatureSet {
 public:
  SignatureSet() = default;
  // Throws SignatureError on empty patterns or duplicate ids.
  explicit SignatureSet(std::vector<Signature> signatures);

  const std::vector<Signature>& signatures() const { return signatures_; }
  const Signature* find(const std::string& id) const;
  std::size_t max_pattern_length() const { return max_pattern_length_; }
  bool empty() const { return signatures_.empty(); }
  std::size_t size() const { return signatures_.size(); }

 private:
  std::vector<Signature> signatures_;
  std::size_t max_pattern_length_ = 0;
};

// SIG-001 linuxpir8-mail, SIG-002 abort-mail, SIG-003 hpftp-size.
SignatureSet default_signatures();

// Tab separated: id, name, kind ("ascii" or "hex"), value. The value is the
// rest of the line, taken verbatim. '#' starts a comment line.
SignatureSet parse_signatures(std::istream& in);
SignatureSet load_signatures(const std::string& path);

// Tail of one direction's in-order byte stream, kept so a pattern split
// across segment boundaries is still seen.
struct FlowCarryBuffer {
  std::vector<std::uint8_t> tail;
  // Stream offset of the byte following `tail`.
  std::uint64_t stream_offset = 0;

  void clear() {
    tail.clear();
    stream_offset = 0;
  }
};

struct SignatureMatch {
  std::string signature_id;
  std::uint64_t offset = 0;  // stream offset of the first matched byte

  friend bool operator==(const SignatureMatch&, const SignatureMatch&) = default;
};

// Finds every occurrence in tail ++ payload that ends inside `payload`,
// then advances the buffer. Results are ordered by offset, then by the
// signature's position in the set. An empty payload leaves the buffer as is.
std::vector<SignatureMatch> match_signatures(FlowCarryBuffer& buffer, ByteView payload,
                                             const SignatureSet& sigs);

}  // namespace sniffwatch
