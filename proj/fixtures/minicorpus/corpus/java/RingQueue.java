public class RingQueue {
    private final int[] data;
    private int head;
    private int size;

    public RingQueue(int capacity) {
        data = new int[capacity];
    }

    public boolean offer(int v) {
        if (size == data.length) {
            return false;
        }
        data[(head + size) % data.length] = v;
        size++;
        return true;
    }

    public int poll() {
        int v = data[head];
        head = (head + 1) % data.length;
        size--;
        return v;
    }
}
