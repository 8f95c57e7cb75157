#include "techgap/posting_list.hpp"

#include <algorithm>

#include "techgap/error.hpp"

namespace techgap {

PostingList PostingList::encode(std::span<const std::uint32_t> ids) {
  PostingList out;
  std::uint32_t prev = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0 && ids[i] <= prev) {
      throw Error(ErrorCode::InvalidArgument, "posting ids must be strictly increasing");
    }
    std::uint32_t gap = ids[i] - (i == 0 ? 0 : prev);
    do {
      std::uint8_t byte = gap & 0x7f;
      gap >>= 7;
      if (gap != 0) byte |= 0x80;
      out.bytes_.push_back(byte);
    } while (gap != 0);
    prev = ids[i];
  }
  out.count_ = ids.size();
  return out;
}

bool PostingList::Cursor::next(std::uint32_t& out) {
  if (emitted_ == list_->count_) return false;
  std::uint32_t gap = 0;
  unsigned shift = 0;
  for (;;) {
    std::uint8_t byte = list_->bytes_[offset_++];
    gap |= static_cast<std::uint32_t>(byte & 0x7f) << shift;
    if (!(byte & 0x80)) break;
    shift += 7;
  }
  last_ = emitted_ == 0 ? gap : last_ + gap;
  ++emitted_;
  out = last_;
  return true;
}

std::vector<std::uint32_t> PostingList::decode() const {
  std::vector<std::uint32_t> out;
  out.reserve(count_);
  Cursor cursor(*this);
  std::uint32_t id = 0;
  while (cursor.next(id)) out.push_back(id);
  return out;
}

std::vector<std::uint32_t> union_postings(std::span<const PostingList* const> lists) {
  std::vector<std::uint32_t> out;
  for (const PostingList* list : lists) {
    std::vector<std::uint32_t> ids = list->decode();
    std::vector<std::uint32_t> merged;
    merged.reserve(out.size() + ids.size());
    std::set_union(out.begin(), out.end(), ids.begin(), ids.end(), std::back_inserter(merged));
    out.swap(merged);
  }
  return out;
}

}  // namespace techgap
