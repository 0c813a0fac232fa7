#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "linpi/types.hpp"

namespace linpi {

using SessId = uint32_t;

enum class SessTag : uint8_t { In, Out, End };

// Session types: receive a value and continue, send a value and continue,
// or stop. Payloads are plain types; recursion makes the graph cyclic.
struct SessNode {
  SessTag tag = SessTag::End;
  TypeId payload = 0;
  SessId cont = 0;
};

class SessionStore {
 public:
  SessId intern_end();
  SessId make_in(TypeId payload, SessId cont);
  SessId make_out(TypeId payload, SessId cont);
  SessId allocate();
  void fill(SessId id, SessTag tag, TypeId payload, SessId cont);
  const SessNode& node(SessId id) const;
  size_t size() const { return nodes_.size(); }

  friend SessId decode(SessionStore& sessions, TypeStore& store, TypeId t);
  friend SessId dual(SessionStore& sessions, SessId s);

 private:
  std::vector<SessNode> nodes_;
  std::optional<SessId> end_cache_;
  std::map<std::pair<TypeId, bool>, SessId> decode_memo_;
  std::map<SessId, SessId> dual_memo_;
};

// Inverts the session encoding into linear channels: a {1,0} channel
// carrying t x s receives t and continues as the decoding of s; a {0,1}
// channel sends t and continues as the dual decoding; a {0,0} channel is
// end regardless of payload. Throws NotSessionShaped on anything else.
SessId decode(SessionStore& sessions, TypeStore& store, TypeId t);

// Swaps every send and receive. An involution.
SessId dual(SessionStore& sessions, SessId s);

bool session_equal(const SessionStore& sessions, TypeStore& store, SessId a,
                   SessId b);

// rec X. !int.?int.X style rendering; composite payloads are parenthesized.
std::string render_session(const SessionStore& sessions, const TypeStore& store,
                           SessId s);

}  // namespace linpi
