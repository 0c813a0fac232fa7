#include "linpi/sessions.hpp"

#include <set>

#include "linpi/error.hpp"

namespace linpi {

/* store */

SessId SessionStore::intern_end() {
  // Scanning for an End tag would be wrong here: allocate() leaves
  // placeholder nodes whose default tag is End until fill() runs, and a
  // decode in progress must not capture one of those as its continuation.
  if (end_cache_) return *end_cache_;
  SessId id = static_cast<SessId>(nodes_.size());
  nodes_.push_back(SessNode{SessTag::End, 0, 0});
  end_cache_ = id;
  return id;
}

SessId SessionStore::make_in(TypeId payload, SessId cont) {
  SessId id = static_cast<SessId>(nodes_.size());
  nodes_.push_back(SessNode{SessTag::In, payload, cont});
  return id;
}

SessId SessionStore::make_out(TypeId payload, SessId cont) {
  SessId id = static_cast<SessId>(nodes_.size());
  nodes_.push_back(SessNode{SessTag::Out, payload, cont});
  return id;
}

SessId SessionStore::allocate() {
  SessId id = static_cast<SessId>(nodes_.size());
  nodes_.push_back(SessNode{});
  return id;
}

void SessionStore::fill(SessId id, SessTag tag, TypeId payload, SessId cont) {
  nodes_.at(id) = SessNode{tag, payload, cont};
}

const SessNode& SessionStore::node(SessId id) const { return nodes_.at(id); }

/* decoding */

namespace {

// The polarity tracks whose side of the conversation the channel describes;
// it flips across every send because the passed continuation channel is
// used by the other side.
SessId decode_rec(SessionStore& ss, TypeStore& store,
                  std::map<std::pair<TypeId, bool>, SessId>& memo, TypeId t,
                  bool positive) {
  auto key = std::make_pair(t, positive);
  auto hit = memo.find(key);
  if (hit != memo.end()) return hit->second;

  const TypeNode& n = store.node(t);
  if (n.tag != TypeTag::Chan) {
    throw Error(ErrorCode::NotSessionShaped,
                "not a channel type: " + render_type(store, t));
  }
  if (n.in_use == Use::Zero && n.out_use == Use::Zero) {
    SessId end = ss.intern_end();
    memo.emplace(key, end);
    return end;
  }
  bool receiving;
  bool flip;
  if (n.in_use == Use::One && n.out_use == Use::Zero) {
    receiving = positive;
    flip = false;
  } else if (n.in_use == Use::Zero && n.out_use == Use::One) {
    receiving = !positive;
    flip = true;
  } else {
    throw Error(ErrorCode::NotSessionShaped,
                "channel uses are not linear: " + render_type(store, t));
  }
  const TypeNode& payload = store.node(n.a);
  if (payload.tag != TypeTag::Prod) {
    throw Error(ErrorCode::NotSessionShaped,
                "payload carries no continuation: " + render_type(store, t));
  }
  SessId id = ss.allocate();
  memo.emplace(key, id);
  SessId cont = decode_rec(ss, store, memo, payload.b,
                           flip ? !positive : positive);
  ss.fill(id, receiving ? SessTag::In : SessTag::Out, payload.a, cont);
  return id;
}

}  // namespace

SessId decode(SessionStore& sessions, TypeStore& store, TypeId t) {
  return decode_rec(sessions, store, sessions.decode_memo_, t, true);
}

SessId dual(SessionStore& sessions, SessId s) {
  auto hit = sessions.dual_memo_.find(s);
  if (hit != sessions.dual_memo_.end()) return hit->second;
  const SessNode n = sessions.node(s);
  if (n.tag == SessTag::End) {
    sessions.dual_memo_.emplace(s, s);
    return s;
  }
  SessId id = sessions.allocate();
  sessions.dual_memo_.emplace(s, id);
  sessions.dual_memo_.emplace(id, s);
  SessId cont = dual(sessions, n.cont);
  sessions.fill(id, n.tag == SessTag::In ? SessTag::Out : SessTag::In,
                n.payload, cont);
  return id;
}

/* equality */

namespace {

bool sess_equal_rec(const SessionStore& ss, TypeStore& store, SessId a, SessId b,
                    std::set<std::pair<SessId, SessId>>& assumed) {
  if (a == b) return true;
  auto key = std::minmax(a, b);
  if (!assumed.insert(key).second) return true;
  const SessNode& na = ss.node(a);
  const SessNode& nb = ss.node(b);
  if (na.tag != nb.tag) return false;
  if (na.tag == SessTag::End) return true;
  if (!type_equal(store, na.payload, nb.payload)) return false;
  return sess_equal_rec(ss, store, na.cont, nb.cont, assumed);
}

}  // namespace

bool session_equal(const SessionStore& sessions, TypeStore& store, SessId a,
                   SessId b) {
  std::set<std::pair<SessId, SessId>> assumed;
  return sess_equal_rec(sessions, store, a, b, assumed);
}

/* rendering */

namespace {

struct SessionRenderer {
  const SessionStore& ss;
  const TypeStore& store;
  std::set<SessId> rec_targets;
  std::map<SessId, std::string> binder;
  std::set<SessId> open;
  int next_binder = 0;

  void find_targets(SessId s, std::set<SessId>& on_stack) {
    if (on_stack.count(s)) {
      rec_targets.insert(s);
      return;
    }
    const SessNode& n = ss.node(s);
    if (n.tag == SessTag::End) return;
    on_stack.insert(s);
    find_targets(n.cont, on_stack);
    on_stack.erase(s);
  }

  std::string binder_for(SessId s) {
    auto it = binder.find(s);
    if (it != binder.end()) return it->second;
    static const char* base[3] = {"X", "Y", "Z"};
    int i = next_binder++;
    std::string name = base[i % 3];
    if (i >= 3) name += std::to_string(i / 3);
    binder.emplace(s, name);
    return name;
  }

  std::string payload_str(TypeId t) {
    std::string s = render_type(store, t);
    const TypeNode& n = store.node(t);
    bool atomic = n.tag == TypeTag::Int || n.tag == TypeTag::Chan;
    if (atomic && s.find("rec ") == std::string::npos) return s;
    return "(" + s + ")";
  }

  std::string render(SessId s) {
    if (rec_targets.count(s)) {
      if (open.count(s)) return binder_for(s);
      open.insert(s);
      std::string body = render_body(s);
      open.erase(s);
      return "rec " + binder_for(s) + ". " + body;
    }
    return render_body(s);
  }

  std::string render_body(SessId s) {
    const SessNode& n = ss.node(s);
    switch (n.tag) {
      case SessTag::End:
        return "end";
      case SessTag::In:
        return "?" + payload_str(n.payload) + "." + render(n.cont);
      case SessTag::Out:
        return "!" + payload_str(n.payload) + "." + render(n.cont);
    }
    throw Error(ErrorCode::Internal, "render: unknown session tag");
  }
};

}  // namespace

std::string render_session(const SessionStore& sessions, const TypeStore& store,
                           SessId s) {
  SessionRenderer r{sessions, store, {}, {}, {}, 0};
  std::set<SessId> stack;
  r.find_targets(s, stack);
  return r.render(s);
}

}  // namespace linpi
