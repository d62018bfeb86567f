//! The Porter stemming algorithm as published in 1980.
//!
//! The mechanics (byte buffer, `k`/`j` cursors, `ends`/`set_to` helpers)
//! follow Martin Porter's reference C program, but the rule tables are the
//! published ones — the reference program's later departures (`bli → ble`
//! for `abli → able`, the added `logi → log`) are deliberately not adopted,
//! matching the original algorithm and the independently generated test
//! vectors. The same applies to the reference program's guard that skips
//! one- and two-letter words: the published algorithm stems everything
//! ("as" → "a"), so no such guard exists here. The test suite pins the
//! behaviour to 2,874 reference word/stem pairs (`tests/porter_vectors.rs`).

use alloc::string::String;
use alloc::vec::Vec;

/// Stems one token.
///
/// Expects the lowercase ASCII words the tokenizer produces. Tokens that
/// contain anything other than `a`–`z` (digits, non-ASCII letters) are
/// returned unchanged. The output can be empty: the plural rule reduces the
/// word "s" to nothing.
pub fn stem(token: &str) -> String {
    if token.is_empty() || !token.bytes().all(|b| b.is_ascii_lowercase()) {
        return token.into();
    }
    let mut s = Stemmer {
        b: token.as_bytes().to_vec(),
        k: token.len() as i32 - 1,
        j: 0,
    };
    s.step1ab();
    s.step1c();
    s.step2();
    s.step3();
    s.step4();
    s.step5();
    s.b.truncate((s.k + 1) as usize);
    String::from_utf8(s.b).expect("stemmer input and output are ASCII")
}

/// Working state, mirroring the reference program: `b[0..=k]` is the current
/// word, and `j` (set by [`Stemmer::ends`]) marks the end of the candidate
/// stem once a suffix has matched. Signed indices because `j` legitimately
/// reaches -1 when a suffix consumes the whole word.
struct Stemmer {
    b: Vec<u8>,
    k: i32,
    j: i32,
}

impl Stemmer {
    fn at(&self, i: i32) -> u8 {
        self.b[i as usize]
    }

    /// Is `b[i]` a consonant? `y` counts as a consonant exactly when it is
    /// word-initial or follows a vowel ("toy": y after vowel → consonant;
    /// "syzygy": each y after a consonant → vowel).
    fn is_consonant(&self, i: i32) -> bool {
        match self.at(i) {
            b'a' | b'e' | b'i' | b'o' | b'u' => false,
            b'y' => i == 0 || !self.is_consonant(i - 1),
            _ => true,
        }
    }

    /// The measure *m* of the stem `b[0..=j]`: the number of vowel→consonant
    /// transitions in its `[C](VC)^m[V]` decomposition.
    fn measure(&self) -> i32 {
        let mut n = 0;
        let mut i = 0;
        loop {
            if i > self.j {
                return n;
            }
            if !self.is_consonant(i) {
                break;
            }
            i += 1;
        }
        i += 1;
        loop {
            loop {
                if i > self.j {
                    return n;
                }
                if self.is_consonant(i) {
                    break;
                }
                i += 1;
            }
            i += 1;
            n += 1;
            loop {
                if i > self.j {
                    return n;
                }
                if !self.is_consonant(i) {
                    break;
                }
                i += 1;
            }
            i += 1;
        }
    }

    /// Does the stem `b[0..=j]` contain a vowel?
    fn stem_has_vowel(&self) -> bool {
        (0..=self.j).any(|i| !self.is_consonant(i))
    }

    /// Is `b[i-1..=i]` a double consonant?
    fn double_consonant(&self, i: i32) -> bool {
        i >= 1 && self.at(i) == self.at(i - 1) && self.is_consonant(i)
    }

    /// Does `b[i-2..=i]` have the form consonant–vowel–consonant, with the
    /// final consonant not `w`, `x`, or `y`? Used to restore a trailing `e`
    /// on short stems (hop-ping → hop, but also rat-ed → rate).
    fn cvc(&self, i: i32) -> bool {
        if i < 2 || !self.is_consonant(i) || self.is_consonant(i - 1) || !self.is_consonant(i - 2)
        {
            return false;
        }
        !matches!(self.at(i), b'w' | b'x' | b'y')
    }

    /// If the current word ends with `suffix`, records the stem boundary in
    /// `j` and returns true. On mismatch `j` is left untouched.
    fn ends(&mut self, suffix: &[u8]) -> bool {
        let l = suffix.len() as i32;
        let start = self.k - l + 1;
        if start < 0 {
            return false;
        }
        if &self.b[start as usize..=self.k as usize] != suffix {
            return false;
        }
        self.j = self.k - l;
        true
    }

    /// Replaces the suffix after `j` with `s`.
    fn set_to(&mut self, s: &[u8]) {
        self.b.truncate((self.j + 1) as usize);
        self.b.extend_from_slice(s);
        self.k = self.j + s.len() as i32;
    }

    /// `set_to(s)`, but only when the stem has positive measure.
    fn replace_if_stem(&mut self, s: &[u8]) {
        if self.measure() > 0 {
            self.set_to(s);
        }
    }

    /// Step 1a (plurals) and 1b (-ed/-ing), with 1b's cleanup of the stem
    /// left behind (at/bl/iz restoration, double-consonant trimming, cvc e).
    fn step1ab(&mut self) {
        if self.at(self.k) == b's' {
            if self.ends(b"sses") {
                self.k -= 2;
            } else if self.ends(b"ies") {
                self.set_to(b"i");
            } else if self.k < 1 || self.at(self.k - 1) != b's' {
                // Not a double s: drop the plural s. For the one-letter
                // word "s" this empties the word (k becomes -1).
                self.k -= 1;
            }
        }
        if self.ends(b"eed") {
            if self.measure() > 0 {
                self.k -= 1;
            }
        } else if (self.ends(b"ed") || self.ends(b"ing")) && self.stem_has_vowel() {
            self.k = self.j;
            if self.ends(b"at") {
                self.set_to(b"ate");
            } else if self.ends(b"bl") {
                self.set_to(b"ble");
            } else if self.ends(b"iz") {
                self.set_to(b"ize");
            } else if self.double_consonant(self.k) {
                self.k -= 1;
                if matches!(self.at(self.k), b'l' | b's' | b'z') {
                    self.k += 1;
                }
            } else if self.measure() == 1 && self.cvc(self.k) {
                self.set_to(b"e");
            }
        }
    }

    /// Step 1c: terminal y → i when the stem holds a vowel.
    fn step1c(&mut self) {
        if self.ends(b"y") && self.stem_has_vowel() {
            self.b[self.k as usize] = b'i';
        }
    }

    /// Step 2: double suffixes mapped to single ones when m > 0. Dispatches
    /// on the penultimate letter, like the reference program, but with the
    /// published rule table (abli → able, no logi rule).
    fn step2(&mut self) {
        if self.k < 1 {
            return;
        }
        match self.at(self.k - 1) {
            b'a' => {
                if self.ends(b"ational") {
                    self.replace_if_stem(b"ate");
                } else if self.ends(b"tional") {
                    self.replace_if_stem(b"tion");
                }
            }
            b'c' => {
                if self.ends(b"enci") {
                    self.replace_if_stem(b"ence");
                } else if self.ends(b"anci") {
                    self.replace_if_stem(b"ance");
                }
            }
            b'e' => {
                if self.ends(b"izer") {
                    self.replace_if_stem(b"ize");
                }
            }
            b'l' => {
                if self.ends(b"abli") {
                    self.replace_if_stem(b"able");
                } else if self.ends(b"alli") {
                    self.replace_if_stem(b"al");
                } else if self.ends(b"entli") {
                    self.replace_if_stem(b"ent");
                } else if self.ends(b"eli") {
                    self.replace_if_stem(b"e");
                } else if self.ends(b"ousli") {
                    self.replace_if_stem(b"ous");
                }
            }
            b'o' => {
                if self.ends(b"ization") {
                    self.replace_if_stem(b"ize");
                } else if self.ends(b"ation") || self.ends(b"ator") {
                    self.replace_if_stem(b"ate");
                }
            }
            b's' => {
                if self.ends(b"alism") {
                    self.replace_if_stem(b"al");
                } else if self.ends(b"iveness") {
                    self.replace_if_stem(b"ive");
                } else if self.ends(b"fulness") {
                    self.replace_if_stem(b"ful");
                } else if self.ends(b"ousness") {
                    self.replace_if_stem(b"ous");
                }
            }
            b't' => {
                if self.ends(b"aliti") {
                    self.replace_if_stem(b"al");
                } else if self.ends(b"iviti") {
                    self.replace_if_stem(b"ive");
                } else if self.ends(b"biliti") {
                    self.replace_if_stem(b"ble");
                }
            }
            _ => {}
        }
    }

    /// Step 3: -ic-, -full, -ness and friends, again when m > 0.
    // The single-rule buckets keep the same shape as the multi-rule ones so
    // the whole table reads like the published one.
    #[allow(clippy::collapsible_match)]
    fn step3(&mut self) {
        if self.k < 0 {
            return;
        }
        match self.at(self.k) {
            b'e' => {
                if self.ends(b"icate") {
                    self.replace_if_stem(b"ic");
                } else if self.ends(b"ative") {
                    self.replace_if_stem(b"");
                } else if self.ends(b"alize") {
                    self.replace_if_stem(b"al");
                }
            }
            b'i' => {
                if self.ends(b"iciti") {
                    self.replace_if_stem(b"ic");
                }
            }
            b'l' => {
                if self.ends(b"ical") {
                    self.replace_if_stem(b"ic");
                } else if self.ends(b"ful") {
                    self.replace_if_stem(b"");
                }
            }
            b's' => {
                if self.ends(b"ness") {
                    self.replace_if_stem(b"");
                }
            }
            _ => {}
        }
    }

    /// Step 4: bare suffixes dropped when m > 1.
    fn step4(&mut self) {
        if self.k < 1 {
            return;
        }
        let matched = match self.at(self.k - 1) {
            b'a' => self.ends(b"al"),
            b'c' => self.ends(b"ance") || self.ends(b"ence"),
            b'e' => self.ends(b"er"),
            b'i' => self.ends(b"ic"),
            b'l' => self.ends(b"able") || self.ends(b"ible"),
            b'n' => {
                self.ends(b"ant")
                    || self.ends(b"ement")
                    || self.ends(b"ment")
                    || self.ends(b"ent")
            }
            // -ion only counts after s or t (vision stays, adoption → adopt);
            // -ou covers -ous via the step's trailing-letter dispatch.
            b'o' => {
                (self.ends(b"ion") && self.j >= 0 && matches!(self.at(self.j), b's' | b't'))
                    || self.ends(b"ou")
            }
            b's' => self.ends(b"ism"),
            b't' => self.ends(b"ate") || self.ends(b"iti"),
            b'u' => self.ends(b"ous"),
            b'v' => self.ends(b"ive"),
            b'z' => self.ends(b"ize"),
            _ => false,
        };
        if matched && self.measure() > 1 {
            self.k = self.j;
        }
    }

    /// Step 5: drop a final -e when m > 1 (or m = 1 without the cvc shape),
    /// and reduce a final -ll when m > 1.
    fn step5(&mut self) {
        if self.k < 0 {
            return;
        }
        self.j = self.k;
        if self.at(self.k) == b'e' {
            let m = self.measure();
            if m > 1 || (m == 1 && !self.cvc(self.k - 1)) {
                self.k -= 1;
            }
        }
        if self.at(self.k) == b'l' && self.double_consonant(self.k) && self.measure() > 1 {
            self.k -= 1;
        }
    }
}
