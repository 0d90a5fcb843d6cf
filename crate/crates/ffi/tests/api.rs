use std::ffi::{c_char, CStr, CString};
use std::ptr;

use semwalk_ffi::*;

const CORPUS: &str = "U: the dog barks\nS: ANIMAL CANINE BARK\n\nU: a dog runs\nS: ANIMAL CANINE MOTION\n\nU: the cat purrs\nS: ANIMAL FELINE PURR\n\nU: a cat runs\nS: ANIMAL FELINE MOTION\n\nU: an animal\nS: ANIMAL\n";
const NORMS: &str = "dog,pets\ncat,pets\n";

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(s: *mut c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
    sw_string_free(s);
    out
}

unsafe fn last_error() -> String {
    CStr::from_ptr(sw_last_error())
        .to_string_lossy()
        .into_owned()
}

#[test]
fn learner_network_and_walks() {
    unsafe {
        let l = sw_learner_new();
        assert_eq!(sw_learner_process(l, c(CORPUS).as_ptr()), SwStatus::Ok);
        let mut t = 0;
        assert_eq!(sw_learner_time(l, &mut t), SwStatus::Ok);
        assert_eq!(t, 5);

        let mut p = 0.0;
        assert_eq!(
            sw_learner_prob(l, c("dog").as_ptr(), c("CANINE").as_ptr(), &mut p),
            SwStatus::Ok
        );
        assert!(p > 0.0 && p < 1.0);
        let status = sw_learner_prob(l, c("dog").as_ptr(), c("PURR").as_ptr(), &mut p);
        assert_eq!(status, SwStatus::NotFound);
        assert!(last_error().contains("dog/PURR"));

        let mut json = ptr::null_mut();
        assert_eq!(sw_learner_meanings_json(l, &mut json), SwStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take(json)).unwrap();
        let dog: f64 = v["meanings"]["dog"]
            .as_object()
            .unwrap()
            .values()
            .map(|x| x.as_f64().unwrap())
            .sum();
        assert!((dog - 1.0).abs() < 1e-12);

        let mut net = ptr::null_mut();
        assert_eq!(
            sw_network_build(l, c(NORMS).as_ptr(), 0.1, 0.1, &mut net),
            SwStatus::Ok
        );
        let (mut nodes, mut edges) = (0, 0);
        assert_eq!(sw_network_size(net, &mut nodes, &mut edges), SwStatus::Ok);
        assert_eq!(nodes, 3);
        assert_eq!(edges, 3);
        let (mut cc, mut pl) = (0.0, 0.0);
        assert_eq!(sw_network_metrics(net, &mut cc, &mut pl), SwStatus::Ok);
        assert_eq!((cc, pl), (1.0, 1.0));

        let mut walks = ptr::null_mut();
        assert_eq!(
            sw_walks_run(net, c("animal").as_ptr(), 10, 4, 3, &mut walks),
            SwStatus::Ok
        );
        assert_eq!(sw_walks_count(walks), 4);
        let mut r = 0;
        assert_eq!(sw_walks_retrievals(walks, 0, &mut r), SwStatus::Ok);
        assert!((1..=3).contains(&r));
        assert_eq!(
            sw_walks_retrievals(walks, 4, &mut r),
            SwStatus::InvalidArgument
        );

        let mut a = ptr::null_mut();
        assert_eq!(sw_walks_to_json(walks, &mut a), SwStatus::Ok);
        let first = take(a);
        let mut again = ptr::null_mut();
        assert_eq!(
            sw_walks_run(net, c("animal").as_ptr(), 10, 4, 3, &mut again),
            SwStatus::Ok
        );
        let mut b = ptr::null_mut();
        assert_eq!(sw_walks_to_json(again, &mut b), SwStatus::Ok);
        assert_eq!(first, take(b));

        let mut text = ptr::null_mut();
        assert_eq!(sw_network_to_json(net, &mut text), SwStatus::Ok);
        let text = take(text);
        let mut copy = ptr::null_mut();
        assert_eq!(
            sw_network_from_json(c(&text).as_ptr(), &mut copy),
            SwStatus::Ok
        );
        let mut text2 = ptr::null_mut();
        assert_eq!(sw_network_to_json(copy, &mut text2), SwStatus::Ok);
        assert_eq!(text, take(text2));

        sw_walks_free(walks);
        sw_walks_free(again);
        sw_network_free(net);
        sw_network_free(copy);
        sw_learner_free(l);
    }
}

#[test]
fn errors_carry_status_and_message() {
    unsafe {
        let l = sw_learner_new();
        assert_eq!(
            sw_learner_process(l, c("U: a b\nS: \n").as_ptr()),
            SwStatus::Parse
        );
        assert!(last_error().contains("line"));
        assert_eq!(sw_learner_process(l, ptr::null()), SwStatus::NullPointer);
        let bad = [0xffu8, 0];
        assert_eq!(
            sw_learner_process(l, bad.as_ptr().cast()),
            SwStatus::InvalidUtf8
        );

        let mut net = ptr::null_mut();
        assert_eq!(
            sw_network_from_json(c("{").as_ptr(), &mut net),
            SwStatus::Json
        );
        assert!(net.is_null());
        assert_eq!(
            sw_network_build(l, c("dog,pets\n").as_ptr(), 0.5, 0.5, &mut net),
            SwStatus::MissingWords
        );

        let mut t = 0;
        assert_eq!(sw_learner_time(ptr::null(), &mut t), SwStatus::NullPointer);
        assert_eq!(sw_learner_time(l, ptr::null_mut()), SwStatus::NullPointer);
        assert_eq!(sw_walks_count(ptr::null()), 0);

        sw_learner_free(l);
        sw_learner_free(ptr::null_mut());
        sw_network_free(ptr::null_mut());
        sw_walks_free(ptr::null_mut());
        sw_string_free(ptr::null_mut());
    }
}

#[test]
fn errors_are_per_thread() {
    unsafe {
        let l = sw_learner_new();
        assert_eq!(sw_learner_process(l, ptr::null()), SwStatus::NullPointer);
        let other = std::thread::spawn(|| sw_last_error().is_null())
            .join()
            .unwrap();
        assert!(other);
        assert!(!sw_last_error().is_null());
        sw_learner_free(l);
    }
}
